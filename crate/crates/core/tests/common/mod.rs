//! A second, table-free implementation of the weight constants, used as an
//! oracle. It shares only `StepFunction` with the library: integrals are
//! summed piece by piece, weak norms are taken over value levels, the
//! maximal functions are rebuilt from their window candidates, and the
//! lightest-subset search enumerates subsets.

#![allow(dead_code)]

use onesided::maximal::Side;
use onesided::orlicz::{bump_ap_plus, bump_wp_minus, ConjugatePair};
use onesided::weights::{ConstantKind, Enumeration};
use onesided::StepFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Cells = Vec<(f64, f64, f64)>;

/// Random strictly positive weights with at most `max_pieces` pieces.
pub fn random_weights(seed: u64, count: usize, max_pieces: usize) -> Vec<StepFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_pieces);
            let mut t = vec![rng.gen_range(-1.0..1.0)];
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                let len = (rng.gen_range(0.2f64.ln()..2f64.ln())).exp();
                t.push(t.last().unwrap() + len);
                v.push((rng.gen_range(0.1f64.ln()..10f64.ln())).exp());
            }
            StepFunction::new(t, v).unwrap()
        })
        .collect()
}

/// Random step functions with possibly vanishing pieces.
pub fn random_functions(seed: u64, count: usize, max_pieces: usize) -> Vec<StepFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_weights(seed ^ 0x5eed, count, max_pieces)
        .into_iter()
        .map(|f| {
            let vals = f.values().iter().map(|&v| if rng.gen_bool(0.2) { 0.0 } else { v }).collect();
            StepFunction::new(f.breakpoints().to_vec(), vals).unwrap()
        })
        .collect()
}

pub fn cells(f: &StepFunction) -> Cells {
    let t = f.breakpoints();
    f.values().iter().enumerate().map(|(i, &v)| (t[i], t[i + 1], v)).collect()
}

pub fn map_values(f: &StepFunction, g: impl Fn(f64) -> f64) -> Cells {
    cells(f).into_iter().map(|(a, b, v)| (a, b, g(v))).collect()
}

pub fn integral(c: &Cells, a: f64, b: f64) -> f64 {
    c.iter().map(|&(lo, hi, v)| v * (hi.min(b) - lo.max(a)).max(0.0)).sum()
}

/// `sup_t t·|{f ≥ t} ∩ (a, b)|` over the values taken on `(a, b)`.
pub fn weak(c: &Cells, a: f64, b: f64) -> f64 {
    let inside: Vec<(f64, f64)> =
        c.iter().map(|&(lo, hi, v)| (v, (hi.min(b) - lo.max(a)).max(0.0))).filter(|x| x.1 > 0.0).collect();
    inside
        .iter()
        .map(|&(level, _)| level * inside.iter().filter(|x| x.0 >= level).map(|x| x.1).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn grid(breakpoints: &[f64], r: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for w in breakpoints.windows(2) {
        for k in 0..r {
            out.push(w[0] + (w[1] - w[0]) * (k as f64 / r as f64));
        }
    }
    out.push(*breakpoints.last().unwrap());
    out
}

pub fn merged_grid(fs: &[&Cells], r: usize) -> Vec<f64> {
    let mut bps: Vec<f64> = fs.iter().flat_map(|c| c.iter().flat_map(|x| [x.0, x.1])).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    grid(&bps, r)
}

/// All `(a, b, c)` with `a < c` on the grid and `b` a grid point in between
/// or the midpoint; only midpoints when `mid_only`.
pub fn triples(g: &[f64], mid_only: bool) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for i in 0..g.len() {
        for k in i + 1..g.len() {
            if !mid_only {
                for j in i + 1..k {
                    out.push((g[i], g[j], g[k]));
                }
            }
            out.push((g[i], 0.5 * (g[i] + g[k]), g[k]));
        }
    }
    out
}

pub fn pairs(g: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..g.len() {
        for k in i + 1..g.len() {
            out.push((g[i], g[k]));
        }
    }
    out
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

// ---- quadrature ----

fn gl_nodes(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

fn gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, nodes: &[(f64, f64)]) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * nodes.iter().map(|&(x, w)| w * f(m + h * x)).sum::<f64>()
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, nodes: &[(f64, f64)], depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gl(f, a, m, nodes), gl(f, m, b, nodes));
    if depth == 0 || (l + r - whole).abs() <= 1e-15 * (l + r).abs() {
        return l + r;
    }
    adaptive(f, a, m, l, nodes, depth - 1) + adaptive(f, m, b, r, nodes, depth - 1)
}

pub fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let nodes = gl_nodes(12);
    adaptive(f, a, b, gl(f, a, b, &nodes), &nodes, 30)
}

// ---- maximal functions ----

/// `∫_I M⁺(hχ_I)^power · weight` over `I = (first cell start, last cell end)`
/// for contiguous cells `h`; `weight` is a list of cells covering `I`.
///
/// On cell `j` with value `v`, `M⁺(hχ_I)(x) = v + max(0, max_k A_k/(t_k − x))`
/// with `A_k = H(t_k) − H(t_j) − v(t_k − t_j)`; the candidates cross at points
/// solving a linear equation.
pub fn mplus_integral(h: &Cells, power: f64, weight: &Cells) -> f64 {
    let t: Vec<f64> = std::iter::once(h[0].0).chain(h.iter().map(|c| c.1)).collect();
    let mut cum = vec![0.0];
    for c in h {
        cum.push(cum.last().unwrap() + c.2 * (c.1 - c.0));
    }
    let mut total = 0.0;
    for (j, &(lo, hi, v)) in h.iter().enumerate() {
        let cands: Vec<(f64, f64)> =
            (j + 2..t.len()).map(|k| (cum[k] - cum[j] - v * (t[k] - t[j]), t[k])).filter(|c| c.0 > 0.0).collect();
        let mut cuts = vec![lo, hi];
        for (x, &(a1, t1)) in cands.iter().enumerate() {
            for &(a2, t2) in &cands[x + 1..] {
                if a1 != a2 {
                    let z = (a1 * t2 - a2 * t1) / (a1 - a2);
                    if z > lo && z < hi {
                        cuts.push(z);
                    }
                }
            }
        }
        for &(a, b, _) in weight {
            for z in [a, b] {
                if z > lo && z < hi {
                    cuts.push(z);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for s in cuts.windows(2) {
            let (a, b) = (s[0], s[1]);
            let m = 0.5 * (a + b);
            let wv = weight.iter().find(|c| c.0 <= m && m < c.1).map_or(0.0, |c| c.2);
            if wv == 0.0 {
                continue;
            }
            let best = cands.iter().copied().map(|(ak, tk)| (ak / (tk - m), ak, tk)).fold(
                None,
                |acc: Option<(f64, f64, f64)>, c| match acc {
                    Some(x) if x.0 >= c.0 => Some(x),
                    _ => Some(c),
                },
            );
            let piece = match best {
                None => v.powf(power) * (b - a),
                Some((_, ak, tk)) => {
                    if power == 1.0 {
                        v * (b - a) + ak * ((tk - a) / (tk - b)).ln()
                    } else {
                        quad(&|x| (v + ak / (tk - x)).powf(power), a, b)
                    }
                }
            };
            total += wv * piece;
        }
    }
    total
}

/// `M⁺f(x)` (or `M⁻f(x)`) as the largest window average over windows from
/// `x` to a breakpoint, together with the one-sided value of `f` at `x`.
pub fn maximal_direct(f: &Cells, x: f64, plus: bool) -> f64 {
    let (c, x) = if plus { (f.clone(), x) } else { (reflect(f), -x) };
    let at = c.iter().find(|q| q.0 <= x && x < q.1).map_or(0.0, |q| q.2);
    let ends = c.iter().flat_map(|q| [q.0, q.1]).filter(|&s| s > x);
    ends.map(|s| integral(&c, x, s) / (s - x)).fold(at, f64::max)
}

fn reflect(c: &Cells) -> Cells {
    c.iter().rev().map(|&(a, b, v)| (-b, -a, v)).collect()
}

/// `∫_I M^±(fχ_I)^power · weight`.
pub fn maximal_integral(f: &Cells, a: f64, b: f64, plus: bool, power: f64, weight: &Cells) -> f64 {
    let h: Cells = f
        .iter()
        .filter_map(|&(lo, hi, v)| {
            let (l, r) = (lo.max(a), hi.min(b));
            (l < r).then_some((l, r, v))
        })
        .collect();
    if plus {
        mplus_integral(&h, power, weight)
    } else {
        mplus_integral(&reflect(&h), power, &reflect(weight))
    }
}

fn indicator(a: f64, b: f64) -> Cells {
    vec![(a, b, 1.0)]
}

// ---- constants ----

pub fn dual(w: &StepFunction, p: f64) -> Cells {
    map_values(w, |v| v.powf(-1.0 / (p - 1.0)))
}

pub fn ap(w: &StepFunction, p: f64, plus: bool, r: usize) -> f64 {
    let (wc, sc) = (cells(w), dual(w, p));
    max_of(triples(&grid(w.breakpoints(), r), false).into_iter().map(|(a, b, c)| {
        let len = c - a;
        let (wl, sl) =
            if plus { (integral(&wc, a, b), integral(&sc, b, c)) } else { (integral(&wc, b, c), integral(&sc, a, b)) };
        (wl / len) * (sl / len).powf(p - 1.0)
    }))
}

pub fn ainf(w: &StepFunction, plus: bool, r: usize) -> f64 {
    let wc = cells(w);
    max_of(
        pairs(&grid(w.breakpoints(), r))
            .into_iter()
            .map(|(a, b)| maximal_integral(&wc, a, b, !plus, 1.0, &indicator(a, b)) / integral(&wc, a, b)),
    )
}

pub fn ap_star(w: &StepFunction, p: f64, r: usize, tilde: bool) -> f64 {
    let (wc, sc) = (cells(w), dual(w, p));
    max_of(
        triples(&grid(w.breakpoints(), r), tilde)
            .into_iter()
            .map(|(a, b, c)| weak(&wc, a, b) * integral(&sc, b, c).powf(p - 1.0) / (c - a).powf(p)),
    )
}

pub fn apq_star(w: &StepFunction, p: f64, q: f64, r: usize, tilde: bool) -> f64 {
    let pp = p / (p - 1.0);
    let (wq, wn) = (map_values(w, |v| v.powf(q)), map_values(w, |v| v.powf(-pp)));
    max_of(triples(&grid(w.breakpoints(), r), tilde).into_iter().map(|(a, b, c)| {
        let len = c - a;
        (weak(&wq, a, b) / len).powf(1.0 / q) * (integral(&wn, b, c) / len).powf(1.0 / pp)
    }))
}

/// `sup_E |E| σ(E)^{-1/r}` over unions of whole cells of `σ` in `(a, b)`.
pub fn lightest_gain(sc: &Cells, a: f64, b: f64, r: f64) -> f64 {
    let inside: Vec<(f64, f64)> =
        sc.iter().map(|&(lo, hi, v)| (v, (hi.min(b) - lo.max(a)).max(0.0))).filter(|x| x.1 > 0.0).collect();
    let n = inside.len();
    (1u32..(1 << n))
        .map(|mask| {
            let (m, s) = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .fold((0.0, 0.0), |(m, s), i| (m + inside[i].1, s + inside[i].0 * inside[i].1));
            m * s.powf(-1.0 / r)
        })
        .fold(0.0, f64::max)
}

pub fn restricted(sigma: &StepFunction, r_exp: f64, r: usize) -> f64 {
    let sc = cells(sigma);
    max_of(
        triples(&grid(sigma.breakpoints(), r), false)
            .into_iter()
            .map(|(a, b, c)| lightest_gain(&sc, a, b, r_exp) * integral(&sc, b, c).powf(1.0 / r_exp) / (c - a)),
    )
}

pub fn testing(w: &StepFunction, sigma: &Cells, p: f64, r: usize) -> f64 {
    let wc = cells(w);
    max_of(pairs(&merged_grid(&[&wc, sigma], r)).into_iter().map(|(a, b)| {
        let local: Cells =
            wc.iter().filter_map(|&(lo, hi, v)| (lo.max(a) < hi.min(b)).then_some((lo.max(a), hi.min(b), v))).collect();
        maximal_integral(sigma, a, b, true, p, &local) / integral(sigma, a, b)
    }))
}

/// `[σ, t^p]_{W_p^-}`: `∫_I M⁺(σχ_I) / σ(I)`.
pub fn wp_minus_power(sigma: &Cells, r: usize) -> f64 {
    max_of(
        pairs(&merged_grid(&[sigma], r))
            .into_iter()
            .map(|(a, b)| maximal_integral(sigma, a, b, true, 1.0, &indicator(a, b)) / integral(sigma, a, b)),
    )
}

/// `[w, σ, t^{p'}]_{A_p^+}`: `(w(a,b)/(c−a)) (σ(b,c)/(c−a))^{p−1}`.
pub fn bump_ap_power(w: &StepFunction, sigma: &Cells, p: f64, r: usize) -> f64 {
    let wc = cells(w);
    max_of(triples(&merged_grid(&[&wc, sigma], r), false).into_iter().map(|(a, b, c)| {
        let len = c - a;
        (integral(&wc, a, b) / len) * (integral(sigma, b, c) / len).powf(p - 1.0)
    }))
}

/// Library value and oracle value of one constant kind.
pub fn both(kind: ConstantKind, w: &StepFunction, r: usize) -> (f64, f64) {
    let en = Enumeration::new(r);
    let p = 2.0;
    let sigma = w.dual_weight(p).unwrap();
    let sc = cells(&sigma);
    let pair = ConjugatePair::power(p).unwrap();
    match kind {
        ConstantKind::ApPlus => (en.ap_oneside(w, 3.0, Side::Plus).unwrap().value, ap(w, 3.0, true, r)),
        ConstantKind::ApMinus => (en.ap_oneside(w, 1.5, Side::Minus).unwrap().value, ap(w, 1.5, false, r)),
        ConstantKind::AinfPlus => (en.ainf_oneside(w, Side::Plus).value, ainf(w, true, r)),
        ConstantKind::AinfMinus => (en.ainf_oneside(w, Side::Minus).value, ainf(w, false, r)),
        ConstantKind::ApStar => (en.ap_star(w, p, false).unwrap().value, ap_star(w, p, r, false)),
        ConstantKind::ApStarTilde => (en.ap_star(w, 3.0, true).unwrap().value, ap_star(w, 3.0, r, true)),
        ConstantKind::ApqStar => (en.apq_star(w, p, 4.0, false).unwrap().value, apq_star(w, p, 4.0, r, false)),
        ConstantKind::ApqStarTilde => (en.apq_star(w, 1.5, 6.0, true).unwrap().value, apq_star(w, 1.5, 6.0, r, true)),
        ConstantKind::RestrictedMinus => (en.restricted_minus(&sigma, 2.0).unwrap().value, restricted(&sigma, 2.0, r)),
        ConstantKind::TestingSplus => (en.testing_splus(w, &sigma, p).unwrap().value, testing(w, &sc, p, r)),
        ConstantKind::BumpWpMinus => {
            (bump_wp_minus(&en, &sigma, &pair.phi_bar, p).unwrap().value, wp_minus_power(&sc, r))
        }
        ConstantKind::BumpApPlus => {
            (bump_ap_plus(&en, w, &sigma, &pair.phi, p).unwrap().value, bump_ap_power(w, &sc, p, r))
        }
    }
}
