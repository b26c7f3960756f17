//! Lacunary Fourier pairs: two scalar series built from geometric frequency
//! blocks `2^n`, the curve family whose Stieltjes integrals against each
//! other have computable limits.
//!
//! With `phi_n(t) = (2 pi)^{-1} exp(-2 pi i 2^n t)` and `psi_n = conj(phi_n)`
//! on real inputs,
//!   `f = sum_n 2^{-n/2} (a_n phi_n + b_n psi_n)`,
//!   `g = sum_n 2^{-n/2} (c_n phi_n + d_n psi_n)`.
//! The pair is real-valued exactly when `b = conj(a)` and `d = conj(c)`.

use crate::error::{domain, Result};
use crate::num::{dyadic_scale, pow2};
use crate::path::ScalarPath;
use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Clone, Debug)]
pub struct LacunarySpec {
    pub a: Vec<C>,
    pub b: Vec<C>,
    pub c: Vec<C>,
    pub d: Vec<C>,
}

fn pad(mut v: Vec<C>, len: usize) -> Vec<C> {
    v.resize(len, C::new(0.0, 0.0));
    v
}

impl LacunarySpec {
    pub fn new(a: Vec<C>, b: Vec<C>, c: Vec<C>, d: Vec<C>) -> Self {
        let len = a.len().max(b.len()).max(c.len()).max(d.len()).max(1);
        LacunarySpec { a: pad(a, len), b: pad(b, len), c: pad(c, len), d: pad(d, len) }
    }

    /// Real-valued pair: `b` and `d` are forced to the conjugate sequences.
    pub fn real_pair(a: Vec<C>, c: Vec<C>) -> Self {
        let len = a.len().max(c.len()).max(1);
        let a = pad(a, len);
        let c = pad(c, len);
        let b = a.iter().map(C::conj).collect();
        let d = c.iter().map(C::conj).collect();
        LacunarySpec { a, b, c, d }
    }

    /// Single-frequency pair `f = sin(2 pi t)/pi`, `g = cos(2 pi t)/pi`.
    pub fn trig_pair() -> Self {
        Self::real_pair(vec![C::new(0.0, 1.0)], vec![C::new(1.0, 0.0)])
    }

    /// Holder-`alpha` pair: sine/cosine blocks with amplitudes
    /// `amplitude * 2^{-(alpha - 1/2) n}`.
    pub fn holder_pair(alpha: f64, n_max: usize, amplitude: f64) -> Result<Self> {
        if !(0.0 < alpha && alpha <= 1.0) {
            return Err(domain("Holder exponent must lie in (0, 1]"));
        }
        let rho: Vec<f64> =
            (0..=n_max).map(|n| amplitude * (2.0f64).powf(-(alpha - 0.5) * n as f64)).collect();
        let a = rho.iter().map(|&r| C::new(0.0, r)).collect();
        let c = rho.iter().map(|&r| C::new(r, 0.0)).collect();
        Ok(Self::real_pair(a, c))
    }

    /// Coefficients whose mixed partial sums drift like minus the harmonic
    /// series, so the area series diverges: `a_n = -i / sqrt(n+1)`,
    /// `d_n = 1 / sqrt(n+1)`.
    pub fn divergent_area(n_max: usize) -> Self {
        let a = (0..=n_max).map(|n| C::new(0.0, -1.0 / ((n + 1) as f64).sqrt())).collect();
        let c = (0..=n_max).map(|n| C::new(1.0 / ((n + 1) as f64).sqrt(), 0.0)).collect();
        Self::real_pair(a, c)
    }

    /// Coefficients with a summable mixed series: `b_k = -i/k`, `c_k = 1/k`
    /// for `k >= k0`, zero below.
    pub fn vanishing_area(k0: usize, n_max: usize) -> Result<Self> {
        if k0 == 0 {
            return Err(domain("the vanishing-area recipe starts at k0 >= 1"));
        }
        let b: Vec<C> = (0..=n_max)
            .map(|k| if k >= k0 { C::new(0.0, -1.0 / k as f64) } else { C::new(0.0, 0.0) })
            .collect();
        let c: Vec<C> = (0..=n_max)
            .map(|k| if k >= k0 { C::new(1.0 / k as f64, 0.0) } else { C::new(0.0, 0.0) })
            .collect();
        let a: Vec<C> = b.iter().map(C::conj).collect();
        let d: Vec<C> = c.iter().map(C::conj).collect();
        Ok(LacunarySpec { a, b, c, d })
    }

    pub fn n_max(&self) -> usize {
        self.a.len() - 1
    }

    pub fn is_real_pair(&self) -> bool {
        self.a.iter().zip(&self.b).all(|(x, y)| *y == x.conj())
            && self.c.iter().zip(&self.d).all(|(x, y)| *y == x.conj())
    }

    fn eval_series(&self, first: &[C], second: &[C], t: f64) -> C {
        let mut acc = C::new(0.0, 0.0);
        for n in 0..first.len() {
            let w = 2.0 * PI * pow2(n as i32) * t;
            let (s, c) = w.sin_cos();
            let phi = C::new(c, -s) / (2.0 * PI);
            let psi = C::new(c, s) / (2.0 * PI);
            acc += (2.0f64).powf(-(n as f64) / 2.0) * (first[n] * phi + second[n] * psi);
        }
        acc
    }

    pub fn f_at(&self, t: f64) -> C {
        self.eval_series(&self.a, &self.b, t)
    }

    pub fn g_at(&self, t: f64) -> C {
        self.eval_series(&self.c, &self.d, t)
    }

    /// Tail weight `L_k` of a coefficient sequence:
    /// `2 (sum_{n <= k} |a_n| 2^{-(k-n)/2} + sum_{n > k} 2^{-(n-k)/2} |a_n|)`.
    pub fn l_tail(coeffs: &[C], k: i32) -> f64 {
        let mut s = 0.0;
        for (n, cf) in coeffs.iter().enumerate() {
            let n = n as i32;
            let e = if n <= k { -(k - n) } else { -(n - k) };
            s += cf.norm() * pow2(e).sqrt();
        }
        2.0 * s
    }

    /// `(L_k(a) + L_k(b)) (L_k(c) + L_k(d))`, the per-scale product entering
    /// the Stieltjes remainder bound.
    pub fn tail_product(&self, k: i32) -> f64 {
        (Self::l_tail(&self.a, k) + Self::l_tail(&self.b, k))
            * (Self::l_tail(&self.c, k) + Self::l_tail(&self.d, k))
    }

    /// Analytic sup-norm bound `(2 pi)^{-1} sum 2^{-n/2} (|a_n| + |b_n|)`.
    pub fn sup_bound_f(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(n, (x, y))| (2.0f64).powf(-(n as f64) / 2.0) * (x.norm() + y.norm()))
            .sum::<f64>()
            / (2.0 * PI)
    }

    pub fn sup_bound_g(&self) -> f64 {
        self.c
            .iter()
            .zip(&self.d)
            .enumerate()
            .map(|(n, (x, y))| (2.0f64).powf(-(n as f64) / 2.0) * (x.norm() + y.norm()))
            .sum::<f64>()
            / (2.0 * PI)
    }

    fn holder_bound_side(first: &[C], second: &[C], alpha: f64) -> f64 {
        // |Delta of the n-block| <= 2^{-n/2} (|a_n| + |b_n|) min(2^n h, 1/pi),
        // summed and maximized over dyadic h, then inflated by 2^alpha to
        // cover in-between gaps.
        let bound_at = |h: f64| -> f64 {
            let mut s = 0.0;
            for n in 0..first.len() {
                let amp = (2.0f64).powf(-(n as f64) / 2.0) * (first[n].norm() + second[n].norm());
                s += amp * (pow2(n as i32) * h).min(1.0 / PI);
            }
            s
        };
        let mut best = 0.0f64;
        for j in 0..=60 {
            let h = pow2(-j);
            best = best.max(bound_at(h) / h.powf(alpha));
        }
        best * (2.0f64).powf(alpha)
    }

    /// Upper bound on the Holder-`alpha` seminorm of `f`, valid for every
    /// pair of parameters at gap below 1.
    pub fn holder_bound_f(&self, alpha: f64) -> f64 {
        Self::holder_bound_side(&self.a, &self.b, alpha)
    }

    pub fn holder_bound_g(&self, alpha: f64) -> f64 {
        Self::holder_bound_side(&self.c, &self.d, alpha)
    }
}

pub struct LacunaryEval {
    pub f: ScalarPath,
    pub g: ScalarPath,
    /// `L_k` tails of the four coefficient sequences for k = 0..=n_max.
    pub l_a: Vec<f64>,
    pub l_b: Vec<f64>,
    pub l_c: Vec<f64>,
    pub l_d: Vec<f64>,
}

fn check_nyquist(spec: &LacunarySpec, grid: &[f64]) -> Result<()> {
    let mesh = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let limit = pow2(-(spec.n_max() as i32 + 2));
    if mesh > limit * (1.0 + 1e-12) {
        return Err(domain(format!(
            "grid mesh {mesh:.3e} undersamples frequency 2^{}; need mesh <= 2^-{}",
            spec.n_max(),
            spec.n_max() + 2
        )));
    }
    Ok(())
}

/// Evaluate a real-valued pair on a grid fine enough for the truncation
/// (mesh at most `2^-(n_max + 2)`).
pub fn lacunary_eval(spec: &LacunarySpec, grid: &[f64]) -> Result<LacunaryEval> {
    if !spec.is_real_pair() {
        return Err(domain(
            "coefficients are not conjugate pairs; use lacunary_eval_complex",
        ));
    }
    check_nyquist(spec, grid)?;
    let fv: Vec<C> = grid.iter().map(|&t| spec.f_at(t)).collect();
    let gv: Vec<C> = grid.iter().map(|&t| spec.g_at(t)).collect();
    let max_im = fv
        .iter()
        .chain(&gv)
        .map(|v| v.im.abs())
        .fold(0.0f64, f64::max);
    if max_im > 1e-12 {
        return Err(domain(format!(
            "declared real pair evaluates with imaginary part {max_im:.3e}"
        )));
    }
    let f = ScalarPath::new(grid.to_vec(), fv.into_iter().map(|v| v.re).collect())?;
    let g = ScalarPath::new(grid.to_vec(), gv.into_iter().map(|v| v.re).collect())?;
    let ks = 0..=spec.n_max() as i32;
    Ok(LacunaryEval {
        f,
        g,
        l_a: ks.clone().map(|k| LacunarySpec::l_tail(&spec.a, k)).collect(),
        l_b: ks.clone().map(|k| LacunarySpec::l_tail(&spec.b, k)).collect(),
        l_c: ks.clone().map(|k| LacunarySpec::l_tail(&spec.c, k)).collect(),
        l_d: ks.map(|k| LacunarySpec::l_tail(&spec.d, k)).collect(),
    })
}

/// Complex evaluation without the reality requirement.
pub fn lacunary_eval_complex(spec: &LacunarySpec, grid: &[f64]) -> Result<(Vec<C>, Vec<C>)> {
    check_nyquist(spec, grid)?;
    Ok((
        grid.iter().map(|&t| spec.f_at(t)).collect(),
        grid.iter().map(|&t| spec.g_at(t)).collect(),
    ))
}

#[derive(Clone, Debug)]
pub struct LimitPrediction {
    /// Truncated value of `(2 pi)^{-1} i sum_n (a_n d_n - b_n c_n)`.
    pub value: C,
    /// Partial sums of the same series, one per truncation level.
    pub partials: Vec<C>,
    /// Observed accumulation range of the real parts of the partial sums;
    /// collapses to the limit for convergent series.
    pub adherence: (f64, f64),
}

/// Predicted mesh-zero limit of the Stieltjes integral of `f` against `g`.
pub fn lacunary_limit(spec: &LacunarySpec) -> LimitPrediction {
    let i = C::new(0.0, 1.0);
    let mut partials = Vec::with_capacity(spec.a.len());
    let mut acc = C::new(0.0, 0.0);
    for n in 0..spec.a.len() {
        acc += spec.a[n] * spec.d[n] - spec.b[n] * spec.c[n];
        partials.push(i * acc / (2.0 * PI));
    }
    let value = *partials.last().unwrap();
    let lo = partials.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    let hi = partials.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    LimitPrediction { value, partials, adherence: (lo, hi) }
}

/// Remainder bound `10 max_{k >= k(mesh)} (L_k(a)+L_k(b))(L_k(c)+L_k(d))`
/// for subdivision sums at the given mesh.
pub fn lacunary_remainder_bound(spec: &LacunarySpec, mesh: f64) -> f64 {
    let k0 = dyadic_scale(mesh);
    let k_hi = spec.n_max() as i32 + 80;
    let mut best = 0.0f64;
    for k in k0..=k_hi {
        best = best.max(spec.tail_product(k));
    }
    10.0 * best
}
