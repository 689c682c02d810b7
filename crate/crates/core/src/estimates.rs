//! Randomized numerical verification of the analysis inequalities:
//! sample spectrally decaying Gaussian fields, evaluate both sides of
//! each estimate, and report worst-case ratio statistics. The implicit
//! constants are fitted, never asserted against a "known" value; the one
//! exception is the Hölder interpolation chain, which holds with constant
//! exactly 1 on every sample and therefore doubles as a correctness
//! oracle for the norm engine itself.

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::nonlin::{abs_pow, n_p, n_p_point, Power};
use crate::spectral::{backward_transform, derivative, lp_norm, sobolev_norm, Spectrum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Deterministic sampler of random fields with coefficients
/// `∝ amplitude · (1+|ξ|)^{-γ} · (complex Gaussian)`. Identical seed and
/// configuration give bit-identical samples; each sample index derives
/// its own sub-seed, so any evaluation order (or a parallel one) yields
/// the same fields.
#[derive(Clone, Copy, Debug)]
pub struct FieldSampler {
    pub seed: u64,
    pub grid: Grid,
    pub spectral_decay: f64,
    pub amplitude: f64,
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl FieldSampler {
    pub fn new(seed: u64, grid: Grid, spectral_decay: f64, amplitude: f64) -> Self {
        Self {
            seed,
            grid,
            spectral_decay,
            amplitude,
        }
    }

    /// Draw the `index`-th field of the stream.
    pub fn sample(&self, index: u64) -> ComplexField {
        let sub_seed = splitmix64(self.seed ^ splitmix64(index));
        let mut rng = ChaCha12Rng::seed_from_u64(sub_seed);
        let n = self.grid.n();
        let half = n / 2;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        // Draw in ascending frequency order: the exposed contract order.
        for m in -(half as i64)..half as i64 {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let xi = match self.grid {
                Grid::Torus(_) => m as f64,
                Grid::Line(g) => m as f64 * g.dxi(),
            };
            let decay = (1.0 + xi.abs()).powf(-self.spectral_decay);
            let slot = if m >= 0 { m } else { m + n as i64 } as usize;
            coeffs[slot] =
                self.amplitude * decay * Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
        backward_transform(&Spectrum::from_natural_coeffs(self.grid, coeffs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaId {
    FractionalChain,
    DifferenceValue,
    DifferenceDerivative,
    TaylorFirst,
    TaylorSecond,
    TaylorThird,
    Interpolation,
}

impl LemmaId {
    pub fn as_str(&self) -> &'static str {
        match self {
            LemmaId::FractionalChain => "fractional_chain",
            LemmaId::DifferenceValue => "difference_value",
            LemmaId::DifferenceDerivative => "difference_derivative",
            LemmaId::TaylorFirst => "taylor_1",
            LemmaId::TaylorSecond => "taylor_2",
            LemmaId::TaylorThird => "taylor_3",
            LemmaId::Interpolation => "interpolation",
        }
    }
}

/// Worst-case ratio statistics for one inequality over a sample stream.
#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub lemma: LemmaId,
    pub p: f64,
    /// Sobolev index where applicable, 0 otherwise.
    pub s: f64,
    pub gamma: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    /// Meaningful only for parameter-free inequalities (interpolation):
    /// true when any sample exceeded ratio 1 beyond roundoff slack.
    pub violated: bool,
    /// Number of grid points or samples skipped because the right-hand
    /// side underflowed (a 0/0 point carries no information about c).
    pub skipped: usize,
}

impl EstimateReport {
    pub const CSV_HEADER: &'static str = "lemma,p,s,gamma,samples,max_ratio,q50,q90,q99,violated";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.lemma.as_str(),
            self.p,
            self.s,
            self.gamma,
            self.samples,
            self.max_ratio,
            self.q50,
            self.q90,
            self.q99,
            self.violated
        )
    }
}

pub fn reports_to_csv(reports: &[EstimateReport]) -> String {
    let mut out = String::from(EstimateReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

struct RatioPool {
    ratios: Vec<f64>,
    skipped: usize,
}

impl RatioPool {
    fn new() -> Self {
        Self {
            ratios: Vec::new(),
            skipped: 0,
        }
    }

    fn push(&mut self, lhs: f64, rhs: f64) {
        if rhs < 1e-300 {
            self.skipped += 1;
        } else {
            self.ratios.push(lhs / rhs);
        }
    }

    fn into_report(
        mut self,
        lemma: LemmaId,
        p: f64,
        s: f64,
        gamma: f64,
        samples: usize,
        violation_threshold: Option<f64>,
    ) -> Result<EstimateReport> {
        if self.ratios.is_empty() {
            return Err(Error::InvalidParameter(
                "all sampled ratios were skipped; nothing to report".into(),
            ));
        }
        self.ratios
            .sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
        let q = |frac: f64| -> f64 {
            let len = self.ratios.len();
            let idx = ((frac * len as f64).ceil() as usize).clamp(1, len) - 1;
            self.ratios[idx]
        };
        let max_ratio = *self.ratios.last().expect("nonempty");
        if !max_ratio.is_finite() {
            return Err(Error::InvalidParameter(
                "ratio statistics produced a non-finite maximum".into(),
            ));
        }
        let violated = violation_threshold.map(|thr| max_ratio > thr).unwrap_or(false);
        Ok(EstimateReport {
            lemma,
            p,
            s,
            gamma,
            samples,
            max_ratio,
            q50: q(0.50),
            q90: q(0.90),
            q99: q(0.99),
            violated,
            skipped: self.skipped,
        })
    }
}

/// Fractional chain rule on the torus:
/// `‖|f|^{p-1}f‖_{H^s} ≤ c ‖f‖_∞^{p-1} ‖f‖_{H^s}` for `0 ≤ s ≤ [p]`
/// (any `s ≥ 0` when `p` is an odd integer).
pub fn verify_fractional_chain(
    sampler: &FieldSampler,
    p: &Power,
    s: f64,
    n_samples: usize,
) -> Result<EstimateReport> {
    if !sampler.grid.is_torus() {
        return Err(Error::Unsupported(
            "the fractional chain rule is verified on torus fields".into(),
        ));
    }
    if !(s >= 0.0) || (!p.is_odd_integer() && s > p.floor() as f64) {
        return Err(Error::InvalidParameter(format!(
            "Sobolev index s = {s} is outside the lemma hypothesis 0 <= s <= [p] = {}",
            p.floor()
        )));
    }
    let mut pool = RatioPool::new();
    for i in 0..n_samples {
        let f = sampler.sample(i as u64);
        let lhs = sobolev_norm(&n_p(&f, p), s)?;
        let rhs = lp_norm(&f, f64::INFINITY)?.powf(p.value() - 1.0) * sobolev_norm(&f, s)?;
        pool.push(lhs, rhs);
    }
    pool.into_report(
        LemmaId::FractionalChain,
        p.value(),
        s,
        sampler.spectral_decay,
        n_samples,
        None,
    )
}

fn magnitude3(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (a.norm_sqr() + b.norm_sqr() + c.norm_sqr()).sqrt()
}

/// Difference estimates, pointwise over grid and samples:
/// `|G(v₁,v₂,w)| ≤ c |v₁-v₂| |(v₁,v₂,w)|^{p-1}` and
/// `|G_x| ≤ c (|v₁ₓ-v₂ₓ| |(v₁,v₂,w)|^{p-1}
///          + |v₁-v₂| |(v₁ₓ,v₂ₓ,wₓ)| |(v₁,v₂,w)|^{p-2})`.
/// Every third sample is an adversarial near-cancellation pair
/// (`v₂ ≈ v₁`), and every third a small-`|w|` triple.
pub fn verify_difference_lemma(
    sampler: &FieldSampler,
    p: &Power,
    n_samples: usize,
) -> Result<[EstimateReport; 2]> {
    let pv = p.value();
    let mut value_pool = RatioPool::new();
    let mut deriv_pool = RatioPool::new();
    for i in 0..n_samples {
        let v1 = sampler.sample(3 * i as u64);
        let mut v2 = sampler.sample(3 * i as u64 + 1);
        let mut w = sampler.sample(3 * i as u64 + 2);
        match i % 3 {
            1 => {
                // Near-cancellation: v₂ = v₁ + 1e-6·d stresses the
                // |v₁ - v₂| factor.
                v2 = v1.zip_with(&v2, |a, d| a + 1e-6 * d);
            }
            2 => {
                w = w.scale(Complex64::new(1e-3, 0.0));
            }
            _ => {}
        }
        let g = v1.zip_with(&w, |v, w| n_p_point(v + w, pv));
        let g = g.sub(&v2.zip_with(&w, |v, w| n_p_point(v + w, pv)));
        let gx = derivative(&g)?;
        let v1x = derivative(&v1)?;
        let v2x = derivative(&v2)?;
        let wx = derivative(&w)?;
        for j in 0..v1.n() {
            let (a, b, c) = (v1.values()[j], v2.values()[j], w.values()[j]);
            let (ax, bx, cx) = (v1x.values()[j], v2x.values()[j], wx.values()[j]);
            let diff = (a - b).norm();
            let mag = magnitude3(a, b, c);
            let mag_x = magnitude3(ax, bx, cx);
            let m_p1 = abs_pow(mag * mag, pv - 1.0);
            let m_p2 = abs_pow(mag * mag, pv - 2.0);
            value_pool.push(g.values()[j].norm(), diff * m_p1);
            deriv_pool.push(
                gx.values()[j].norm(),
                (ax - bx).norm() * m_p1 + diff * mag_x * m_p2,
            );
        }
    }
    let gamma = sampler.spectral_decay;
    Ok([
        value_pool.into_report(LemmaId::DifferenceValue, pv, 0.0, gamma, n_samples, None)?,
        deriv_pool.into_report(
            LemmaId::DifferenceDerivative,
            pv,
            0.0,
            gamma,
            n_samples,
            None,
        )?,
    ])
}

/// Taylor-remainder estimates (`p ≥ 3`), one report per estimate:
/// remainders from `taylor_remainders` against
/// `|v|²(|w|^{p-3}+|v|^{p-3})`, `|v|²|w|(|w|^{p-2}+|v|^{p-2})`, and
/// `|v|²(|w|^{p-2}+|v|^{p-2})`. Alternating samples use small-`|w|`
/// fields to probe the `|w|^{p-3}` weight near its `p = 3` boundary.
pub fn verify_taylor_lemma(
    sampler: &FieldSampler,
    p: &Power,
    n_samples: usize,
) -> Result<[EstimateReport; 3]> {
    if p.value() < 3.0 {
        return Err(Error::InvalidParameter(format!(
            "Taylor estimates require p >= 3, got {}",
            p.value()
        )));
    }
    let pv = p.value();
    let mut pools = [RatioPool::new(), RatioPool::new(), RatioPool::new()];
    for i in 0..n_samples {
        let v = sampler.sample(2 * i as u64);
        let mut w = sampler.sample(2 * i as u64 + 1);
        if i % 2 == 1 {
            w = w.scale(Complex64::new(1e-3, 0.0));
        }
        let [r1, r2, r3] = crate::nonlin::taylor_remainders(&v, &w, p)?;
        for j in 0..v.n() {
            let v2 = v.values()[j].norm_sqr();
            let w2 = w.values()[j].norm_sqr();
            let rhs1 = v2 * (abs_pow(w2, pv - 3.0) + abs_pow(v2, pv - 3.0));
            let rhs2 = v2 * w2.sqrt() * (abs_pow(w2, pv - 2.0) + abs_pow(v2, pv - 2.0));
            let rhs3 = v2 * (abs_pow(w2, pv - 2.0) + abs_pow(v2, pv - 2.0));
            pools[0].push(r1.values()[j].norm(), rhs1);
            pools[1].push(r2.values()[j].norm(), rhs2);
            pools[2].push(r3.values()[j].norm(), rhs3);
        }
    }
    let gamma = sampler.spectral_decay;
    let [p0, p1, p2] = pools;
    Ok([
        p0.into_report(LemmaId::TaylorFirst, pv, 0.0, gamma, n_samples, None)?,
        p1.into_report(LemmaId::TaylorSecond, pv, 0.0, gamma, n_samples, None)?,
        p2.into_report(LemmaId::TaylorThird, pv, 0.0, gamma, n_samples, None)?,
    ])
}

/// Hölder interpolation `‖v‖_q^q ≤ ‖v‖_2^{2(p-q+1)/(p-1)}
/// ‖v‖_{p+1}^{(p+1)(q-2)/(p-1)}` for `2 ≤ q ≤ p+1`: a constant-1
/// inequality that must hold on every sample; a violation beyond 1e-12
/// relative slack is a build-stopping failure of the norm engine.
pub fn verify_interpolation(
    sampler: &FieldSampler,
    p: &Power,
    q: f64,
    n_samples: usize,
) -> Result<EstimateReport> {
    let pv = p.value();
    if !(2.0..=pv + 1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "interpolation exponent must satisfy 2 <= q <= p+1, got q = {q}"
        )));
    }
    let mut pool = RatioPool::new();
    for i in 0..n_samples {
        let v = sampler.sample(i as u64);
        let lhs = lp_norm(&v, q)?.powf(q);
        let rhs = lp_norm(&v, 2.0)?.powf(2.0 * (pv - q + 1.0) / (pv - 1.0))
            * lp_norm(&v, pv + 1.0)?.powf((pv + 1.0) * (q - 2.0) / (pv - 1.0));
        pool.push(lhs, rhs);
    }
    pool.into_report(
        LemmaId::Interpolation,
        pv,
        q,
        sampler.spectral_decay,
        n_samples,
        Some(1.0 + 1e-12),
    )
}
