//! Projective bimodules E(gⁿ,θ) = S(ℝ × ℤ/cₙℤ) restricted to Gaussian data.
//!
//! A vector is a finite sum of terms w·e(2πiξ)·e(μx²/2 + βx) on components
//! α ∈ ℤ/cₙℤ. The four generator actions (U, V on the right; U′, V′ on the
//! left) translate, modulate, and shift components; ξ is a complex exponent
//! accumulator that absorbs the quadratic-in-shift phases, which keeps the
//! stored weights of order one even when individual translates carry exponents
//! far outside f64 range (the pairings that matter balance those exponents).
//!
//! Inner products: l2_inner pairs terms by the closed Gaussian integral,
//! rieffel_inner sums ⟨·,·⟩_{L²} against monomial actions into an element of
//! A_θ on either side, holo_inner is the closed form of that series on the
//! holomorphic slice, and star realises the tensor product of holomorphic
//! vectors as a function on ℤ/c_{n+m}ℤ. verify_imprimitivity and
//! verify_tensor_compatibility check the module identities numerically by two
//! independent routes.

use crate::nctorus::{
    e2pi, gaussian_tail_radius, phase_half_theta, siegel_from_tau, NcError, Siegel2, TorusElement,
};
use crate::qarith::{in_s_theta, power_entries, IntMatrix2, QarithError, QuadraticIrrational};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Errors from bimodule construction and pairings.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BimoduleError {
    #[error("matrix is not in the stabilizer semigroup of theta")]
    NotInStabilizer,
    #[error("tau must lie in the upper half-plane")]
    BadTau,
    #[error("module sizes exceed machine integers")]
    GeometryTooLarge,
    #[error("vectors live on different component counts")]
    ComponentMismatch,
    #[error("operands belong to different module geometries")]
    GeometryMismatch,
    #[error("holomorphic data must have exactly c_n components, got {0}")]
    BadLength(usize),
    #[error("series radius {radius} exceeded the budget {budget}")]
    RadiusBudgetExceeded { radius: i64, budget: i64 },
    #[error(transparent)]
    Torus(#[from] NcError),
    #[error(transparent)]
    Arith(#[from] QarithError),
}

type Result<T> = std::result::Result<T, BimoduleError>;

/// Truncation policy for the series in this module: drop below `trunc_tol`,
/// widen every adaptive radius by `radius_scale` (tests recheck at 1.5×), and
/// fail rather than sum past `radius_budget`.
#[derive(Debug, Clone, Copy)]
pub struct SeriesOptions {
    pub trunc_tol: f64,
    pub radius_scale: f64,
    pub radius_budget: i64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { trunc_tol: 1e-14, radius_scale: 1.0, radius_budget: 4096 }
    }
}

impl SeriesOptions {
    pub fn with_tol(trunc_tol: f64) -> Self {
        Self { trunc_tol, ..Self::default() }
    }

    /// The same policy with every adaptive radius widened by `scale`.
    pub fn rescaled(&self, scale: f64) -> Self {
        Self { radius_scale: self.radius_scale * scale, ..*self }
    }
}

/// Which side of the bimodule an element of A_θ acts on or is paired against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One of the four module generator actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorAction {
    URight,
    VRight,
    UprimeLeft,
    VprimeLeft,
}

/// The geometry of E(gⁿ,θ): matrix entries of gⁿ, the unit εₙ = cₙθ + dₙ,
/// the modulus μₙ = τ·cₙ/εₙ, and the lattice matrix Ωₙ = Ω/(cₙεₙ).
#[derive(Debug, Clone)]
pub struct ModuleGeometry {
    g: IntMatrix2,
    theta: QuadraticIrrational,
    tau: Complex64,
    n: u32,
    a_n: i64,
    b_n: i64,
    c_n: i64,
    d_n: i64,
    eps_n: f64,
    eps_n_inv: f64,
    theta_f64: f64,
    mu_n: Complex64,
}

impl PartialEq for ModuleGeometry {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g && self.theta == other.theta && self.tau == other.tau && self.n == other.n
    }
}

/// Builds the geometry of E(gⁿ,θ), checking g ∈ S_θ and Im μₙ > 0.
pub fn make_geometry(
    g: &IntMatrix2,
    theta: &QuadraticIrrational,
    tau: Complex64,
    n: u32,
) -> Result<ModuleGeometry> {
    if !in_s_theta(g, theta) {
        return Err(BimoduleError::NotInStabilizer);
    }
    if tau.im <= 0.0 {
        return Err(BimoduleError::BadTau);
    }
    let entries = power_entries(g, theta, n)?;
    let as_i64 = |x: &num_bigint::BigInt| x.to_i64().ok_or(BimoduleError::GeometryTooLarge);
    let (a_n, b_n, c_n, d_n) =
        (as_i64(&entries.a_n)?, as_i64(&entries.b_n)?, as_i64(&entries.c_n)?, as_i64(&entries.d_n)?);
    let eps_n = entries.eps_n.to_f64();
    let eps_n_inv = entries.eps_n.galois_conjugate().to_f64();
    let mu_n = tau * (c_n as f64 / eps_n);
    assert!(mu_n.im > 0.0, "Im mu_n must be positive on the stabilizer semigroup");
    Ok(ModuleGeometry {
        g: g.clone(),
        theta: theta.clone(),
        tau,
        n,
        a_n,
        b_n,
        c_n,
        d_n,
        eps_n,
        eps_n_inv,
        theta_f64: theta.to_f64(),
        mu_n,
    })
}

impl ModuleGeometry {
    pub fn g(&self) -> &IntMatrix2 {
        &self.g
    }

    pub fn theta(&self) -> &QuadraticIrrational {
        &self.theta
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a_n(&self) -> i64 {
        self.a_n
    }

    pub fn b_n(&self) -> i64 {
        self.b_n
    }

    pub fn c_n(&self) -> i64 {
        self.c_n
    }

    pub fn d_n(&self) -> i64 {
        self.d_n
    }

    /// εₙ = cₙθ + dₙ as f64.
    pub fn eps_n(&self) -> f64 {
        self.eps_n
    }

    /// εₙ⁻¹ = cₙθ′ + dₙ as f64, from the exact Galois conjugate.
    pub fn eps_n_inv(&self) -> f64 {
        self.eps_n_inv
    }

    pub fn theta_f64(&self) -> f64 {
        self.theta_f64
    }

    /// μₙ = τ·cₙ/εₙ.
    pub fn mu_n(&self) -> Complex64 {
        self.mu_n
    }

    /// Ωₙ = Ω/(cₙεₙ) with Ω the Siegel matrix of τ.
    pub fn omega_n(&self) -> Result<Siegel2> {
        Ok(siegel_from_tau(self.tau)?.div_real(self.c_n as f64 * self.eps_n)?)
    }

    fn same_frame(&self, other: &Self) -> bool {
        self.g == other.g && self.theta == other.theta && self.tau == other.tau
    }
}

/// One Gaussian packet on component α: w·e(2πiξ)·e(μx²/2 + βx).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm {
    pub alpha: i64,
    pub w: Complex64,
    pub xi: Complex64,
    pub mu: Complex64,
    pub beta: Complex64,
}

impl GaussianTerm {
    /// The L² norm of the packet: |w|e^{−2π Im ξ}·e^{π(Im β)²/Im μ}·(2 Im μ)^{−1/4}.
    pub fn l2_norm(&self) -> f64 {
        let log_mag = (self.w.norm().max(1e-300)).ln() - 2.0 * PI * self.xi.im
            + PI * self.beta.im * self.beta.im / self.mu.im
            - 0.25 * (2.0 * self.mu.im).ln();
        log_mag.exp()
    }

    pub fn value(&self, x: f64) -> Complex64 {
        let expo = self.xi + self.mu * (0.5 * x * x) + self.beta * x;
        self.w * e2pi(expo)
    }
}

/// A finite sum of Gaussian packets in S(ℝ × ℤ/cℤ).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVector {
    c: i64,
    trunc_tol: f64,
    terms: Vec<GaussianTerm>,
}

impl GaussianVector {
    pub fn new(c: i64, trunc_tol: f64) -> Self {
        Self { c, trunc_tol, terms: Vec::new() }
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds a packet, reducing α mod c and dropping it below the L² threshold.
    pub fn push(&mut self, mut term: GaussianTerm) {
        assert!(term.mu.im > 0.0, "Gaussian packets need Im mu > 0 for Schwartz decay");
        term.alpha = term.alpha.rem_euclid(self.c);
        if term.l2_norm() >= self.trunc_tol {
            self.terms.push(term);
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = Self::new(self.c, self.trunc_tol);
        for t in &self.terms {
            out.push(GaussianTerm { w: t.w * z, ..*t });
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.c != other.c {
            return Err(BimoduleError::ComponentMismatch);
        }
        let mut out = self.clone();
        for t in &other.terms {
            out.push(*t);
        }
        Ok(out)
    }

    /// The function value at (x, α).
    pub fn evaluate(&self, x: f64, alpha: i64) -> Complex64 {
        let a = alpha.rem_euclid(self.c);
        self.terms
            .iter()
            .filter(|t| t.alpha == a)
            .map(|t| t.value(x))
            .sum()
    }
}

/// A vector in the holomorphic slice Eₙ: φ_f(x,α) = e(μₙx²/2)·f(α).
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicVector {
    geom: ModuleGeometry,
    f: Vec<Complex64>,
}

impl HolomorphicVector {
    pub fn new(geom: ModuleGeometry, f: Vec<Complex64>) -> Result<Self> {
        if f.len() != geom.c_n as usize {
            return Err(BimoduleError::BadLength(f.len()));
        }
        Ok(Self { geom, f })
    }

    /// δ_k in Eₙ.
    pub fn delta(geom: ModuleGeometry, k: i64) -> Self {
        let c = geom.c_n as usize;
        let mut f = vec![Complex64::new(0.0, 0.0); c];
        f[k.rem_euclid(geom.c_n) as usize] = Complex64::new(1.0, 0.0);
        Self { geom, f }
    }

    pub fn geom(&self) -> &ModuleGeometry {
        &self.geom
    }

    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    pub fn f_mod(&self, idx: i64) -> Complex64 {
        self.f[idx.rem_euclid(self.geom.c_n) as usize]
    }

    pub fn norm_l2(&self) -> f64 {
        self.f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Embeds φ_f as Gaussian packets: one term (α, f(α), ξ=0, μₙ, β=0) per α.
pub fn embed_holomorphic(v: &HolomorphicVector, trunc_tol: f64) -> GaussianVector {
    let mut out = GaussianVector::new(v.geom.c_n, trunc_tol);
    for (alpha, &w) in v.f.iter().enumerate() {
        if w.norm() == 0.0 {
            continue;
        }
        out.push(GaussianTerm {
            alpha: alpha as i64,
            w,
            xi: Complex64::new(0.0, 0.0),
            mu: v.geom.mu_n,
            beta: Complex64::new(0.0, 0.0),
        });
    }
    out
}

/// Translation x ↦ x − t on one packet: ξ += μt²/2 − βt, β −= μt.
fn translate(term: &mut GaussianTerm, t: f64) {
    term.xi += term.mu * (0.5 * t * t) - term.beta * t;
    term.beta -= term.mu * t;
}

/// Applies one generator (k-th power) to every packet:
///   (fU^k):    α ↦ α + k,    x ↦ x − kεₙ/cₙ
///   (fV^k):    ξ −= kαdₙ/cₙ, β += k
///   (U′^k f):  α ↦ α + k·aₙ, x ↦ x − k/cₙ
///   (V′^k f):  ξ −= kα/cₙ,   β += k/εₙ
pub fn apply_generator_power(
    v: &GaussianVector,
    geom: &ModuleGeometry,
    which: GeneratorAction,
    k: i64,
) -> Result<GaussianVector> {
    if v.c != geom.c_n {
        return Err(BimoduleError::ComponentMismatch);
    }
    let c = geom.c_n as f64;
    let kf = k as f64;
    let mut out = GaussianVector::new(v.c, v.trunc_tol);
    for t0 in &v.terms {
        let mut t = *t0;
        match which {
            GeneratorAction::URight => {
                t.alpha += k;
                translate(&mut t, kf * geom.eps_n / c);
            }
            GeneratorAction::VRight => {
                t.xi -= Complex64::new(kf * t.alpha as f64 * geom.d_n as f64 / c, 0.0);
                t.beta += kf;
            }
            GeneratorAction::UprimeLeft => {
                t.alpha += k * geom.a_n;
                translate(&mut t, kf / c);
            }
            GeneratorAction::VprimeLeft => {
                t.xi -= Complex64::new(kf * t.alpha as f64 / c, 0.0);
                t.beta += kf * geom.eps_n_inv;
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// Single application, the k = 1 case.
pub fn apply_generator(
    v: &GaussianVector,
    geom: &ModuleGeometry,
    which: GeneratorAction,
) -> Result<GaussianVector> {
    apply_generator_power(v, geom, which, 1)
}

/// v·U^{m₁}V^{m₂}: U first, then V, so that f(XY) = (fX)Y.
pub fn monomial_right(
    v: &GaussianVector,
    geom: &ModuleGeometry,
    m: (i64, i64),
) -> Result<GaussianVector> {
    let u = apply_generator_power(v, geom, GeneratorAction::URight, m.0)?;
    apply_generator_power(&u, geom, GeneratorAction::VRight, m.1)
}

/// U′^{m₁}V′^{m₂}·v: V′ first, then U′, so that (XY)f = X(Yf).
pub fn monomial_left(
    v: &GaussianVector,
    geom: &ModuleGeometry,
    m: (i64, i64),
) -> Result<GaussianVector> {
    let vp = apply_generator_power(v, geom, GeneratorAction::VprimeLeft, m.1)?;
    apply_generator_power(&vp, geom, GeneratorAction::UprimeLeft, m.0)
}

/// Linear extension of the monomial actions of an element of A_θ.
pub fn apply_torus(
    v: &GaussianVector,
    geom: &ModuleGeometry,
    a: &TorusElement,
    side: Side,
) -> Result<GaussianVector> {
    if *a.theta() != geom.theta {
        return Err(BimoduleError::Torus(NcError::MismatchedTheta));
    }
    let mut out = GaussianVector::new(v.c, v.trunc_tol);
    for (&m, &amp) in a.coeffs() {
        let moved = match side {
            Side::Right => monomial_right(v, geom, m)?,
            Side::Left => monomial_left(v, geom, m)?,
        };
        for t in &moved.terms {
            out.push(GaussianTerm { w: t.w * amp, ..*t });
        }
    }
    Ok(out)
}

/// Pairs whose combined exponent real part falls below this are dropped as
/// exact zeros of the pairing at working precision.
const PAIR_EXPONENT_FLOOR: f64 = -200.0;

/// ⟨v,w⟩_{L²} = Σ_α ∫ v(x,α)·conj(w(x,α)) dx by the closed Gaussian integral:
/// every term pair on a shared component contributes
/// w₁·conj(w₂)·√(i/A)·exp(2πi(ξ₁−conj ξ₂) − iπB²/A) with A = μ₁ − conj μ₂,
/// B = β₁ − conj β₂, principal square root (Im A > 0 keeps i/A in the right
/// half-plane, away from the branch cut).
pub fn l2_inner(v: &GaussianVector, w: &GaussianVector) -> Result<Complex64> {
    if v.c != w.c {
        return Err(BimoduleError::ComponentMismatch);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for t1 in &v.terms {
        for t2 in &w.terms {
            if t1.alpha != t2.alpha {
                continue;
            }
            let a = t1.mu - t2.mu.conj();
            let b = t1.beta - t2.beta.conj();
            let expo = Complex64::new(0.0, 2.0 * PI) * (t1.xi - t2.xi.conj())
                - Complex64::new(0.0, PI) * b * b / a;
            if expo.re < PAIR_EXPONENT_FLOOR {
                continue;
            }
            let root = (Complex64::new(0.0, 1.0) / a).sqrt();
            sum += t1.w * t2.w.conj() * root * expo.exp();
        }
    }
    Ok(sum)
}

/// Runs an adaptive square-shell summation: `coeff` produces the value at each
/// index, shells stop after two consecutive all-below-tol rings past the
/// minimum radius, and the stop radius is then stretched by `radius_scale`
/// before the final pass. The minimum radius guards series whose support
/// starts away from the origin (monomial alignment conditions repeat with
/// period cₙ, so one period is always scanned).
fn shell_sum(
    opts: &SeriesOptions,
    min_radius: i64,
    mut coeff: impl FnMut((i64, i64)) -> Result<Complex64>,
    mut sink: impl FnMut((i64, i64), Complex64),
) -> Result<()> {
    let mut low_shells = 0;
    let mut radius = 0i64;
    while low_shells < 2 {
        let mut shell_max: f64 = 0.0;
        for m in shell_indices(radius) {
            let z = coeff(m)?;
            shell_max = shell_max.max(z.norm());
            sink(m, z);
        }
        low_shells = if shell_max < opts.trunc_tol && radius >= min_radius {
            low_shells + 1
        } else {
            0
        };
        radius += 1;
        if radius > opts.radius_budget {
            return Err(BimoduleError::RadiusBudgetExceeded {
                radius,
                budget: opts.radius_budget,
            });
        }
    }
    let stretched = ((radius - 1) as f64 * opts.radius_scale).ceil() as i64;
    for r in radius..=stretched {
        for m in shell_indices(r) {
            sink(m, coeff(m)?);
        }
    }
    Ok(())
}

fn shell_indices(r: i64) -> Vec<(i64, i64)> {
    if r == 0 {
        return vec![(0, 0)];
    }
    let mut out = Vec::with_capacity((8 * r) as usize);
    for k in -r..=r {
        out.push((k, r));
        out.push((k, -r));
    }
    for k in (-r + 1)..r {
        out.push((r, k));
        out.push((-r, k));
    }
    out
}

/// The Rieffel inner product as a truncated series over monomials:
/// left: Σₘ ⟨v, U′^{m₁}V′^{m₂}w⟩_{L²}·U^{m₁}V^{m₂};
/// right: εₙ·Σₘ ⟨w, v·U^{m₁}V^{m₂}⟩_{L²}·U^{m₁}V^{m₂}
/// (the argument order swaps on the right, and the prefactor is the unit εₙ).
pub fn rieffel_inner(
    v: &GaussianVector,
    w: &GaussianVector,
    geom: &ModuleGeometry,
    side: Side,
    opts: &SeriesOptions,
) -> Result<TorusElement> {
    if v.c != geom.c_n || w.c != geom.c_n {
        return Err(BimoduleError::ComponentMismatch);
    }
    let mut out = TorusElement::new(geom.theta.clone(), opts.trunc_tol)?;
    shell_sum(
        opts,
        geom.c_n,
        |m| match side {
            Side::Left => l2_inner(v, &monomial_left(w, geom, m)?),
            Side::Right => {
                Ok(l2_inner(w, &monomial_right(v, geom, m)?)? * geom.eps_n)
            }
        },
        |m, z| out.insert_add(m, z),
    )?;
    Ok(out)
}

/// ⟨v,w⟩ on the holomorphic slice in closed form:
/// coeff(m) = (2 Im μₙ)^{−1/2}·Q(m)·e(½mᵗΩₙm)·e(−(θ/2)m₁m₂)·e(aₙm₁m₂/(2cₙ)),
/// Q(m) = Σ_α f(α + aₙm₁)·conj(g(α))·e(αm₂/cₙ), indices mod cₙ.
pub fn holo_inner(
    v: &HolomorphicVector,
    w: &HolomorphicVector,
    opts: &SeriesOptions,
) -> Result<TorusElement> {
    if v.geom != w.geom {
        return Err(BimoduleError::GeometryMismatch);
    }
    let geom = &v.geom;
    let c = geom.c_n;
    let omega_n = geom.omega_n()?;
    let pref = 1.0 / (2.0 * geom.mu_n.im).sqrt();
    let sup = pref * v.norm_l2() * w.norm_l2();
    let radius = ((gaussian_tail_radius(omega_n.lambda_min(), sup, opts.trunc_tol) as f64)
        * opts.radius_scale)
        .ceil() as i64;
    if radius > opts.radius_budget {
        return Err(BimoduleError::RadiusBudgetExceeded { radius, budget: opts.radius_budget });
    }
    let mut out = TorusElement::new(geom.theta.clone(), opts.trunc_tol)?;
    for m1 in -radius..=radius {
        for m2 in -radius..=radius {
            let mut q = Complex64::new(0.0, 0.0);
            for alpha in 0..c {
                let fv = v.f_mod(alpha + geom.a_n * m1);
                let gv = w.f[alpha as usize];
                if fv.norm() == 0.0 || gv.norm() == 0.0 {
                    continue;
                }
                q += fv * gv.conj() * e2pi(Complex64::new(alpha as f64 * m2 as f64 / c as f64, 0.0));
            }
            if q.norm() == 0.0 {
                continue;
            }
            let gauss = e2pi(omega_n.quad_form([m1 as f64, m2 as f64]) * 0.5);
            let theta_phase = phase_half_theta(&geom.theta, -m1 * m2);
            let frame_phase = e2pi(Complex64::new(
                geom.a_n as f64 * m1 as f64 * m2 as f64 / (2.0 * c as f64),
                0.0,
            ));
            out.insert_add((m1, m2), pref * q * gauss * theta_phase * frame_phase);
        }
    }
    Ok(out)
}

/// The tensor product of holomorphic slices as a function on ℤ/c_{n+m}ℤ:
/// (u ⋆ v)(α) = Σ_q e((τ/2)(c_{n+m}/(cₙc_m))(q − shα)²)·u(aₙd_{n+m}α − q)·v(a_m q)
/// with sh = c_m d_{n+m}/c_{n+m}. The q-window is centered at the Gaussian
/// kernel's center sh·α, which grows with α (a window fixed at 0 silently
/// truncates the dominant terms for large α), with radius from the kernel decay.
pub fn star(
    u: &HolomorphicVector,
    v: &HolomorphicVector,
    opts: &SeriesOptions,
) -> Result<HolomorphicVector> {
    if !u.geom.same_frame(&v.geom) {
        return Err(BimoduleError::GeometryMismatch);
    }
    let target = make_geometry(&u.geom.g, &u.geom.theta, u.geom.tau, u.geom.n + v.geom.n)?;
    let values: Vec<Complex64> =
        (0..target.c_n).map(|alpha| star_at(u, v, &target, alpha, opts)).collect::<Result<_>>()?;
    debug_assert!(
        {
            let shifted: Vec<Complex64> = (0..target.c_n)
                .map(|alpha| star_at(u, v, &target, alpha + target.c_n, opts))
                .collect::<Result<_>>()
                .unwrap_or_default();
            values
                .iter()
                .zip(&shifted)
                .all(|(a, b)| (a - b).norm() < 100.0 * opts.trunc_tol * (1.0 + a.norm()))
        },
        "star output failed its periodicity self-check"
    );
    HolomorphicVector::new(target, values)
}

/// One component of u ⋆ v, summed over the centered q-window.
fn star_at(
    u: &HolomorphicVector,
    v: &HolomorphicVector,
    target: &ModuleGeometry,
    alpha: i64,
    opts: &SeriesOptions,
) -> Result<Complex64> {
    let (gn, gm) = (&u.geom, &v.geom);
    let kappa = target.c_n as f64 / (gn.c_n as f64 * gm.c_n as f64);
    let fac = target.tau * (0.5 * kappa);
    let sup = u.f.iter().map(|z| z.norm()).fold(0.0, f64::max)
        * v.f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sup == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let decay = PI * target.tau.im * kappa;
    let radius = ((((sup / opts.trunc_tol).max(std::f64::consts::E).ln() / decay).sqrt().ceil()
        + 1.0)
        * opts.radius_scale) as i64;
    if radius > opts.radius_budget {
        return Err(BimoduleError::RadiusBudgetExceeded { radius, budget: opts.radius_budget });
    }
    let sh = gm.c_n as f64 * target.d_n as f64 / target.c_n as f64;
    let center = (sh * alpha as f64).round() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for q in (center - radius)..=(center + radius) {
        let t = q as f64 - sh * alpha as f64;
        let kernel = e2pi(fac * (t * t));
        let uf = u.f_mod(gn.a_n * target.d_n * alpha - q);
        let vf = v.f_mod(gm.a_n * q);
        sum += kernel * uf * vf;
    }
    Ok(sum)
}

/// Largest deviation between a star output at α and at α + c_{n+m}, the
/// well-definedness check of the product on ℤ/c_{n+m}ℤ.
pub fn star_periodicity_residual(
    u: &HolomorphicVector,
    v: &HolomorphicVector,
    opts: &SeriesOptions,
) -> Result<f64> {
    let target = make_geometry(&u.geom.g, &u.geom.theta, u.geom.tau, u.geom.n + v.geom.n)?;
    let mut worst: f64 = 0.0;
    for alpha in 0..target.c_n {
        let here = star_at(u, v, &target, alpha, opts)?;
        let there = star_at(u, v, &target, alpha + target.c_n, opts)?;
        worst = worst.max((here - there).norm());
    }
    Ok(worst)
}

/// A two-route comparison: norms of both sides and their largest deviation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualReport {
    pub lhs_norm: f64,
    pub rhs_norm: f64,
    pub max_abs_diff: f64,
    pub pass: bool,
}

/// Checks ⟨v,w⟩_left·z = v·⟨w,z⟩_right by evaluating both sides on the grid
/// x ∈ {−2,−1,0,0.37,1,2} × all components.
pub fn verify_imprimitivity(
    v: &GaussianVector,
    w: &GaussianVector,
    z: &GaussianVector,
    geom: &ModuleGeometry,
    opts: &SeriesOptions,
    tol: f64,
) -> Result<ResidualReport> {
    let left = rieffel_inner(v, w, geom, Side::Left, opts)?;
    let lhs = apply_torus(z, geom, &left, Side::Left)?;
    let right = rieffel_inner(w, z, geom, Side::Right, opts)?;
    let rhs = apply_torus(v, geom, &right, Side::Right)?;
    let xs = [-2.0, -1.0, 0.0, 0.37, 1.0, 2.0];
    let (mut lhs_norm, mut rhs_norm, mut diff): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for alpha in 0..geom.c_n {
        for &x in &xs {
            let lv = lhs.evaluate(x, alpha);
            let rv = rhs.evaluate(x, alpha);
            lhs_norm = lhs_norm.max(lv.norm());
            rhs_norm = rhs_norm.max(rv.norm());
            diff = diff.max((lv - rv).norm());
        }
    }
    Ok(ResidualReport { lhs_norm, rhs_norm, max_abs_diff: diff, pass: diff < tol })
}

/// Checks the tensor identity ⟨t(f₁⊗f₂), t(s₁⊗s₂)⟩ = ⟨f₁·⟨f₂,s₂⟩, s₁⟩ by two
/// routes: the star product followed by the closed-form pairing at grade n+m,
/// against the right action of ⟨f₂,s₂⟩ on the embedded f₁ paired with s₁
/// through the L² series at grade n.
pub fn verify_tensor_compatibility(
    f1: &HolomorphicVector,
    s1: &HolomorphicVector,
    f2: &HolomorphicVector,
    s2: &HolomorphicVector,
    opts: &SeriesOptions,
    tol: f64,
) -> Result<ResidualReport> {
    if f1.geom != s1.geom || f2.geom != s2.geom || !f1.geom.same_frame(&f2.geom) {
        return Err(BimoduleError::GeometryMismatch);
    }
    let lhs = holo_inner(&star(f1, f2, opts)?, &star(s1, s2, opts)?, opts)?;
    let inner_m = holo_inner(f2, s2, opts)?;
    let moved = apply_torus(&embed_holomorphic(f1, opts.trunc_tol), &f1.geom, &inner_m, Side::Right)?;
    let rhs = rieffel_inner(&moved, &embed_holomorphic(s1, opts.trunc_tol), &f1.geom, Side::Left, opts)?;
    let diff = lhs.max_abs_diff(&rhs);
    Ok(ResidualReport {
        lhs_norm: lhs.max_abs_coeff(),
        rhs_norm: rhs.max_abs_coeff(),
        max_abs_diff: diff,
        pass: diff < tol,
    })
}

#[derive(Serialize, Deserialize)]
struct HoloJson {
    g: [i64; 4],
    theta: QuadraticIrrational,
    tau: ComplexJson,
    n: u32,
    f: Vec<ComplexJson>,
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

impl Serialize for HolomorphicVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let g = &self.geom.g;
        let to = |x: &num_bigint::BigInt| x.to_i64().ok_or_else(|| serde::ser::Error::custom("matrix entry exceeds i64"));
        HoloJson {
            g: [to(&g.a)?, to(&g.b)?, to(&g.c)?, to(&g.d)?],
            theta: self.geom.theta.clone(),
            tau: ComplexJson { re: self.geom.tau.re, im: self.geom.tau.im },
            n: self.geom.n,
            f: self.f.iter().map(|z| ComplexJson { re: z.re, im: z.im }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HolomorphicVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = HoloJson::deserialize(d)?;
        let g = IntMatrix2::new(raw.g[0], raw.g[1], raw.g[2], raw.g[3]);
        let geom = make_geometry(&g, &raw.theta, Complex64::new(raw.tau.re, raw.tau.im), raw.n)
            .map_err(serde::de::Error::custom)?;
        HolomorphicVector::new(geom, raw.f.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
            .map_err(serde::de::Error::custom)
    }
}
