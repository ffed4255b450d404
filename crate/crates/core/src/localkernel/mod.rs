//! The group-averaged local reproducing kernel on `C^n / (Z/m)`.
//!
//! With the flat potential `phi = |z|^2` the sesqui-holomorphic extension is
//! `psi(x, y) = sum_j x_j conj(y_j)` and the local kernel is exactly the Fock
//! kernel `k^n e^{k psi}`; there are no lower order corrections. Averaging over
//! the group gives
//!
//! ```text
//! K_av(y, x) = (1/m) sum_{u,v} lambda^{k(v-u)} k^n e^{k psi(zeta^u y, zeta^v x)}
//!            = k^n sum_s lambda^{-ks} e^{k psi(zeta^s y, x)}
//! ```
//!
//! which has weight `k` in `y` and `-k` in `x`.
//!
//! The reproducing check pairs a monomial against `K_av(., x)` with a cutoff
//! and evaluates the integral in double-double arithmetic: for `k >= 20` the
//! true residual is far below `f64` roundoff of the integrand.

pub mod dd;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::FlatCyclicModel;
use crate::root_of_unity;
use dd::{gauss_legendre, Cdd, Dd};

#[derive(Clone, Debug, PartialEq)]
pub struct AveragedKernelFlat {
    model: FlatCyclicModel,
}

/// Diagnostics of one reproducing-property evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproducingCheck {
    pub k: u64,
    pub residual: f64,
    /// `u(x)`.
    pub value: (f64, f64),
    /// `(chi u, K_av(., x))`.
    pub pairing: (f64, f64),
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

/// Node counts and stopping rule for the disc quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Gauss-Legendre nodes on each of `[0, R/2]` and `[R/2, R]` at the first level.
    pub radial: usize,
    pub angular: usize,
    /// Number of node doublings allowed after the first level.
    pub max_doublings: u32,
    /// Relative agreement required between successive levels.
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { radial: 24, angular: 48, max_doublings: 4, rel_tol: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub s: u32,
    pub u: u64,
    pub v: u64,
    /// `(k, sup over grid of k^s |(eta - 1)^s eta^k|)`.
    pub per_k: Vec<(u64, f64)>,
    pub sup: f64,
    /// `(s q / e)^s` with `q = max_j |w_j| / |Re w_j|` over the coordinates the
    /// group element moves, `w_j = lambda^{a_j (u - v)} - 1`. Since
    /// `|e^z - 1| <= |z|` for `Re z <= 0`, every `k^s |(eta - 1)^s eta^k|` is
    /// below it.
    pub bound: f64,
}

impl DecayReport {
    /// Max over the lower and upper halves of the `k` range.
    pub fn half_maxima(&self) -> (f64, f64) {
        let mid = self.per_k.len() / 2;
        let max = |s: &[(u64, f64)]| s.iter().map(|p| p.1).fold(0.0, f64::max);
        (max(&self.per_k[..mid]), max(&self.per_k[mid..]))
    }
}

impl AveragedKernelFlat {
    pub fn new(model: FlatCyclicModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &FlatCyclicModel {
        &self.model
    }

    fn lambda(&self, p: u64) -> Complex64 {
        root_of_unity(self.model.m(), p % self.model.m())
    }

    /// `psi(x, y) = sum_j x_j conj(y_j)`.
    pub fn psi(x: &[Complex64], y: &[Complex64]) -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
    }

    /// `zeta^s x`, with `zeta` acting by `lambda^{a_j}` on coordinate `j`.
    pub fn act(&self, s: u64, x: &[Complex64]) -> Vec<Complex64> {
        x.iter()
            .zip(self.model.weights())
            .map(|(xj, &a)| xj * self.lambda(a * (s % self.model.m())))
            .collect()
    }

    fn check_dim(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.model.n() {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, got {}",
                self.model.n(),
                v.len()
            )));
        }
        Ok(())
    }

    /// Single-sum form `k^n sum_s lambda^{-ks} e^{k psi(zeta^s y, x)}`.
    pub fn averaged_kernel(&self, k: u64, y: &[Complex64], x: &[Complex64]) -> Result<Complex64> {
        self.check_dim(y)?;
        self.check_dim(x)?;
        let m = self.model.m();
        let kf = k as f64;
        let sum: Complex64 = (0..m)
            .map(|s| {
                let phase = self.lambda((m - (k % m) * s % m) % m);
                phase * (Self::psi(&self.act(s, y), x) * kf).exp()
            })
            .sum();
        Ok(sum * kf.powi(self.model.n() as i32))
    }

    /// Double-sum definition `(1/m) sum_{u,v} lambda^{k(v-u)} K(zeta^u y, zeta^v x)`.
    pub fn averaged_kernel_double_sum(
        &self,
        k: u64,
        y: &[Complex64],
        x: &[Complex64],
    ) -> Result<Complex64> {
        self.check_dim(y)?;
        self.check_dim(x)?;
        let m = self.model.m();
        let kf = k as f64;
        let kn = kf.powi(self.model.n() as i32);
        let mut sum = Complex64::new(0.0, 0.0);
        for u in 0..m {
            let yu = self.act(u, y);
            for v in 0..m {
                let xv = self.act(v, x);
                let phase = self.lambda((k % m) * ((v + m - u) % m));
                sum += phase * kn * (Self::psi(&yu, &xv) * kf).exp();
            }
        }
        Ok(sum / m as f64)
    }

    /// `(chi z^alpha, K_av(., x))_{k phi, m}` on a one-dimensional model, by
    /// Gauss-Legendre in the radius times the trapezoid rule in the angle over
    /// the disc of radius `radius`.
    pub fn pairing_monomial(
        &self,
        k: u64,
        alpha: u64,
        x: Complex64,
        radius: f64,
        radial: usize,
        angular: usize,
    ) -> Result<(Complex64, f64)> {
        if self.model.n() != 1 {
            return Err(Error::Unsupported(
                "reproducing quadrature is implemented for n = 1".into(),
            ));
        }
        let (value, scale) = self.pairing_dd(k, alpha, x, radius, radial, angular);
        Ok((value.to_c64(), scale.to_f64()))
    }

    fn pairing_dd(
        &self,
        k: u64,
        alpha: u64,
        x: Complex64,
        radius: f64,
        radial: usize,
        angular: usize,
    ) -> (Cdd, Dd) {
        let m = self.model.m();
        let a = self.model.weights()[0];
        let kd = Dd::new(k as f64);
        let x = Cdd::from_f64(x.re, x.im);
        // conj K_av(y, x) = k sum_s lambda^{ks} exp(k lambda^{-as} conj(y) x)
        let terms: Vec<(Cdd, Cdd)> = (0..m)
            .map(|s| {
                let phase = Cdd::root_of_unity(m, (k % m) * s % m);
                let rot = Cdd::root_of_unity(m, (m - a * s % m) % m);
                (phase, (rot * x).scale(kd))
            })
            .collect();
        let conj_dir: Vec<Cdd> = (0..angular as u64)
            .map(|j| Cdd::root_of_unity(angular as u64, angular as u64 - j))
            .collect();
        let mono_dir: Vec<Cdd> = (0..angular as u64)
            .map(|j| Cdd::root_of_unity(angular as u64, alpha * j))
            .collect();
        let r_full = Dd::new(radius);
        let r_half = r_full / 2.0;
        let mut nodes = gauss_legendre(radial, Dd::ZERO, r_half);
        nodes.extend(gauss_legendre(radial, r_half, r_full));

        let mut total = Cdd::ZERO;
        let mut scale = Dd::ZERO;
        for (r, w) in nodes {
            let chi = cutoff(r, r_half, r_full);
            if chi.hi == 0.0 {
                continue;
            }
            let radial_weight = w * chi * r.powi(alpha as u32 + 1);
            let gauss = -(kd * r * r);
            for j in 0..angular {
                let ybar = conj_dir[j].scale(r);
                let mut kernel = Cdd::ZERO;
                for (phase, coef) in &terms {
                    let expo = *coef * ybar + Cdd::new(gauss, Dd::ZERO);
                    kernel = kernel + *phase * expo.exp();
                }
                let term = (mono_dir[j] * kernel).scale(radial_weight);
                scale = scale + term.norm();
                total = total + term;
            }
        }
        // k / (m pi) from the kernel prefactor and the volume form, 2 pi / N from the angle
        let prefactor = kd * 2.0 / Dd::new((m * angular as u64) as f64);
        (total.scale(prefactor), scale * prefactor)
    }

    /// Residual `|u(x) - (chi u, K_av(., x))|` for `u = z^alpha` of weight `k`,
    /// refining the quadrature until two successive levels agree.
    pub fn verify_reproducing(
        &self,
        k: u64,
        alpha: u64,
        x: Complex64,
        radius: f64,
        opts: QuadratureOptions,
    ) -> Result<ReproducingCheck> {
        if self.model.n() != 1 {
            return Err(Error::Unsupported(
                "reproducing quadrature is implemented for n = 1".into(),
            ));
        }
        if !self.model.is_admissible(k, &[alpha]) {
            return Err(Error::InvalidPoint(format!(
                "monomial z^{alpha} does not have weight {k} mod {}",
                self.model.m()
            )));
        }
        if x.norm() > 1.0 {
            return Err(Error::InvalidPoint("reproducing check needs |x| <= 1".into()));
        }
        if radius < 3.0 {
            return Err(Error::InvalidPoint("quadrature radius must be >= 3".into()));
        }
        let ux = Cdd::from_f64(x.re, x.im).powu(alpha);
        let mut prev: Option<Dd> = None;
        let mut last_change = f64::INFINITY;
        for level in 0..=opts.max_doublings {
            let radial = opts.radial << level;
            let angular = opts.angular << level;
            let (pairing, scale) = self.pairing_dd(k, alpha, x, radius, radial, angular);
            let residual = (ux - pairing).norm();
            if let Some(p) = prev {
                let change = (residual - p).abs().to_f64();
                let floor = 1e-28 * scale.to_f64();
                if change <= opts.rel_tol * residual.to_f64() + floor {
                    return Ok(ReproducingCheck {
                        k,
                        residual: residual.to_f64(),
                        value: (ux.re.to_f64(), ux.im.to_f64()),
                        pairing: (pairing.re.to_f64(), pairing.im.to_f64()),
                        radial_nodes: 2 * radial,
                        angular_nodes: angular,
                    });
                }
                last_change = change;
            }
            prev = Some(residual);
        }
        Err(Error::Quadrature {
            estimate: prev.map(Dd::to_f64).unwrap_or(f64::NAN),
            change: last_change,
        })
    }

    /// `eta(x) = exp(psi(zeta^u x, zeta^v x) - phi(x))` from moduli.
    pub fn eta_exponent(&self, u: u64, v: u64, moduli: &[f64]) -> Complex64 {
        let m = self.model.m();
        let d = (u % m + m - v % m) % m;
        moduli
            .iter()
            .zip(self.model.weights())
            .map(|(r, &a)| (self.lambda(a * d) - 1.0) * r * r)
            .sum()
    }

    /// `sup` over the grid of `k^s |(eta - 1)^s eta^k|` for each `k`.
    pub fn decay_check(
        &self,
        s: u32,
        u: u64,
        v: u64,
        grid: &[Vec<f64>],
        ks: &[u64],
    ) -> Result<DecayReport> {
        let m = self.model.m();
        if u % m == v % m {
            return Err(Error::InvalidPoint("decay check needs u != v mod m".into()));
        }
        if s == 0 {
            return Err(Error::InvalidPoint("decay check needs s >= 1".into()));
        }
        let mut per_k = Vec::with_capacity(ks.len());
        for &k in ks {
            let mut best = 0.0f64;
            for x in grid {
                if x.len() != self.model.n() {
                    return Err(Error::InvalidPoint("grid point dimension mismatch".into()));
                }
                let z = self.eta_exponent(u, v, x);
                let eta_minus_one = expm1_complex(z).norm();
                if eta_minus_one == 0.0 {
                    continue;
                }
                let ln_q = s as f64 * ((k as f64).ln() + eta_minus_one.ln()) + k as f64 * z.re;
                best = best.max(ln_q.exp());
            }
            per_k.push((k, best));
        }
        let sup = per_k.iter().map(|p| p.1).fold(0.0, f64::max);
        let d = (u % m + m - v % m) % m;
        let q = self
            .model
            .weights()
            .iter()
            .map(|&a| self.lambda(a * d) - 1.0)
            .filter(|w| w.norm() > 1e-12)
            .map(|w| w.norm() / w.re.abs())
            .fold(0.0, f64::max);
        let bound = (s as f64 * q / std::f64::consts::E).powi(s as i32);
        Ok(DecayReport { s, u, v, per_k, sup, bound })
    }
}

/// `e^z - 1` without cancellation for small `z`.
fn expm1_complex(z: Complex64) -> Complex64 {
    let half_sin = (z.im / 2.0).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half_sin * half_sin,
        z.re.exp() * z.im.sin(),
    )
}

/// `1` on `[0, R/2]`, `0` beyond `R`, quintic smoothstep (C^2) in between.
fn cutoff(r: Dd, half: Dd, full: Dd) -> Dd {
    if r.hi <= half.hi {
        return Dd::ONE;
    }
    if r.hi >= full.hi {
        return Dd::ZERO;
    }
    let t = (r - half) / (full - half);
    let step = t * t * t * (Dd::new(10.0) - t * 15.0 + t * t * 6.0);
    Dd::ONE - step
}
