//! Independent high-precision derivation of coupling schemes.
//!
//! Works directly with `Δ_i = β_i/α_i` in 2048-bit fixed point and the plain
//! product formula, with no logarithms and no exact-rational shortcuts.

use decouple_kit::coefficients::{Hypothesis, Mode};

use super::bigfixed::Fx;

#[derive(Clone, Debug)]
pub struct Entry {
    pub label: (i64, i64),
    pub alpha: Fx,
    pub beta: Fx,
    pub c: Fx,
}

pub fn labels(k: usize, h: Hypothesis) -> Vec<(i64, i64)> {
    let k = k as i64;
    if h == Hypothesis::H2 {
        return (1..=k).map(|i| (i, 1)).chain([(1, 2)]).collect();
    }
    let mut out = Vec::new();
    let top = if k % 2 == 1 {
        (k - 1) / 2
    } else {
        out.push((0, 1));
        (k - 2) / 2
    };
    for i in 1..=top {
        out.push((i, 1));
        out.push((-i, 1));
    }
    out.push((1, 2));
    out.push((-1, 2));
    out
}

fn alpha_beta(k: usize, h: Hypothesis, (p, q): (i64, i64)) -> (Fx, Fx) {
    if p == 0 {
        return (Fx::int(1), Fx::zero());
    }
    let i = Fx::ratio(p, q);
    let kk = Fx::int(k as i64);
    match h {
        Hypothesis::H1 => {
            let r = (&(&kk * &kk) + &(&i * &i)).sqrt();
            (&i / &r, &kk / &r)
        }
        Hypothesis::H3 => {
            let s = &kk * &kk.sqrt();
            let d = &s + &i.abs();
            (&i / &d, &s / &d)
        }
        Hypothesis::H2 => {
            let i2 = &i * &i;
            let d = &(&kk * &kk) + &i2;
            (&i2 / &d, &(&kk * &kk) / &d)
        }
    }
}

pub fn homogeneous(k: usize, h: Hypothesis) -> Vec<Entry> {
    let labels = labels(k, h);
    let ab: Vec<(Fx, Fx)> = labels.iter().map(|&l| alpha_beta(k, h, l)).collect();
    let delta: Vec<Fx> = ab.iter().map(|(a, b)| b / a).collect();
    let sum = delta.iter().fold(Fx::zero(), |acc, d| &acc + d);
    let mut out = Vec::new();
    for j in 0..labels.len() {
        let mut prod = Fx::int(1);
        for l in 0..labels.len() {
            if l != j {
                prod = &prod * &(&delta[j] - &delta[l]);
            }
        }
        let c = &(&(&delta[j] - &sum) / &prod) / &ab[j].0.pow(k);
        if c.is_zero() {
            continue;
        }
        out.push(Entry {
            label: labels[j],
            alpha: ab[j].0.clone(),
            beta: ab[j].1.clone(),
            c,
        });
    }
    out
}

fn half(x: &Fx) -> Fx {
    x / &Fx::int(2)
}

pub fn scheme(k: usize, h: Hypothesis, mode: Mode) -> Vec<Entry> {
    match mode {
        Mode::Homogeneous => homogeneous(k, h),
        Mode::General if h == Hypothesis::H2 => homogeneous(k, h)
            .into_iter()
            .flat_map(|e| {
                let plus = Entry { c: half(&e.c), ..e.clone() };
                let minus = Entry {
                    alpha: -&e.alpha,
                    c: -&half(&e.c),
                    ..e
                };
                [plus, minus]
            })
            .collect(),
        Mode::General => {
            let (odd, even) = if k % 2 == 1 { (k, k - 1) } else { (k - 1, k) };
            let mut out = Vec::new();
            for e in homogeneous(odd, h) {
                out.push(Entry { c: half(&e.c), ..e.clone() });
                out.push(Entry {
                    alpha: -&e.alpha,
                    beta: -&e.beta,
                    c: -&half(&e.c),
                    ..e
                });
            }
            if even > 0 {
                for e in homogeneous(even, h) {
                    out.push(Entry { c: half(&e.c), ..e.clone() });
                    out.push(Entry {
                        alpha: -&e.alpha,
                        beta: -&e.beta,
                        c: half(&e.c),
                        ..e
                    });
                }
            }
            out
        }
    }
}

/// `(d, t, Σ c α^{d−t} β^t − target, Σ |c α^{d−t} β^t|)` for every `t ≤ d` and each listed degree.
pub fn moments(entries: &[Entry], degrees: &[usize]) -> Vec<(usize, usize, Fx, Fx)> {
    let top = degrees.iter().copied().max().unwrap_or(0);
    let powers = |x: &Fx| {
        let mut v = vec![Fx::int(1)];
        for j in 0..top {
            let next = &v[j] * x;
            v.push(next);
        }
        v
    };
    let tables: Vec<(Vec<Fx>, Vec<Fx>)> = entries.iter().map(|e| (powers(&e.alpha), powers(&e.beta))).collect();
    let mut out = Vec::new();
    for &d in degrees {
        for t in 0..=d {
            let mut sum = Fx::zero();
            let mut scale = Fx::zero();
            for (e, (ap, bp)) in entries.iter().zip(&tables) {
                let term = &(&e.c * &ap[d - t]) * &bp[t];
                scale = &scale + &term.abs();
                sum = &sum + &term;
            }
            let target = if t + 1 == d { Fx::int(1) } else { Fx::zero() };
            out.push((d, t, &sum - &target, scale));
        }
    }
    out
}

pub fn c1_norm(entries: &[Entry]) -> Fx {
    entries.iter().fold(Fx::zero(), |acc, e| &acc + &e.c.abs())
}
