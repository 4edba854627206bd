//! Spin Hamiltonian of an axial S = 3/2 defect: energy levels, exact
//! resonance fields of the three allowed transitions, and the first-order
//! angular splitting law.
//!
//! The Hamiltonian is written in the defect frame with the static field
//! tilted by the polar angle `theta` (the azimuth is irrelevant for an axial
//! tensor and fixed to zero):
//!
//! ```text
//! H = nu0(B) (sin(theta) Sx + cos(theta) Sz) + D (Sz^2 - S(S+1)/3)
//! ```
//!
//! with `nu0(B) = g mu_B B / h` in MHz and the axial parameter `D` in MHz.
//! The zero-field gap of the S = 3/2 quartet is `2 D`.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

use crate::constants::MU_B_OVER_H_MHZ_PER_MT;
use crate::spectrum::isotope_site_probabilities;

/// Absolute field tolerance of the resonance root search, mT.
pub const FIELD_TOLERANCE_MT: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum SpinModelError {
    #[error("spin must be a positive half-integer, got {0}")]
    InvalidSpin(f64),
    #[error("invalid spin system: {0}")]
    InvalidSystem(String),
    #[error("magnetic field must be non-negative, got {0} mT")]
    NegativeField(f64),
    #[error("orientation angle must lie in [0, pi], got {0} rad")]
    InvalidAngle(f64),
    #[error("microwave frequency must be positive, got {0} GHz")]
    InvalidFrequency(f64),
    #[error("no resonance for {label} in the bracket [{lo_mt} mT, {hi_mt} mT]")]
    NoResonance {
        label: TransitionLabel,
        lo_mt: f64,
        hi_mt: f64,
    },
    #[error("transition labelling is defined for spin 3/2, got spin {0}")]
    UnsupportedSpin(f64),
}

/// Static parameters of the spin defect and its nuclear environment.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    /// Half-integer spin quantum number (3/2 for the V2 centre).
    pub spin: f64,
    /// Dimensionless electron g-factor.
    pub g_factor: f64,
    /// Axial zero-field-splitting scalar D, MHz. The quartet gap is 2 D.
    pub zfs_d_mhz: f64,
    /// Hyperfine splitting between adjacent satellite lines, mT.
    pub hyperfine_a_mt: f64,
    /// Fraction of neighbour nuclei carrying spin 1/2.
    pub abundance_i_half: f64,
    /// Number of nearest-neighbour sites that can host such a nucleus.
    pub n_neighbor_sites: u32,
}

impl SpinSystem {
    pub fn new(
        spin: f64,
        g_factor: f64,
        zfs_d_mhz: f64,
        hyperfine_a_mt: f64,
        abundance_i_half: f64,
        n_neighbor_sites: u32,
    ) -> Result<Self, SpinModelError> {
        validate_spin(spin)?;
        if !(g_factor > 0.0) {
            return Err(SpinModelError::InvalidSystem(format!(
                "g_factor must be positive, got {g_factor}"
            )));
        }
        if !(zfs_d_mhz >= 0.0) {
            return Err(SpinModelError::InvalidSystem(format!(
                "zfs_d_mhz must be non-negative, got {zfs_d_mhz}"
            )));
        }
        if !(hyperfine_a_mt >= 0.0) {
            return Err(SpinModelError::InvalidSystem(format!(
                "hyperfine_a_mt must be non-negative, got {hyperfine_a_mt}"
            )));
        }
        if !(0.0..=1.0).contains(&abundance_i_half) {
            return Err(SpinModelError::InvalidSystem(format!(
                "abundance_i_half must lie in [0, 1], got {abundance_i_half}"
            )));
        }
        if n_neighbor_sites < 1 {
            return Err(SpinModelError::InvalidSystem(
                "n_neighbor_sites must be at least 1".into(),
            ));
        }
        Ok(Self {
            spin,
            g_factor,
            zfs_d_mhz,
            hyperfine_a_mt,
            abundance_i_half,
            n_neighbor_sites,
        })
    }

    /// V2-centre defaults: S = 3/2, g = 2.0023, D = 35 MHz, natural 29Si
    /// abundance over the 12 nearest silicon sites.
    pub fn v2(hyperfine_a_mt: f64) -> Result<Self, SpinModelError> {
        Self::new(1.5, crate::constants::DEFAULT_G_FACTOR, 35.0, hyperfine_a_mt, 0.047, 12)
    }

    /// Zeeman slope g mu_B / h in MHz per mT.
    pub fn zeeman_mhz_per_mt(&self) -> f64 {
        self.g_factor * MU_B_OVER_H_MHZ_PER_MT
    }

    /// Zero-field splitting 2 D, MHz.
    pub fn zfs_mhz(&self) -> f64 {
        2.0 * self.zfs_d_mhz
    }

    /// Hilbert-space dimension 2 S + 1.
    pub fn dimension(&self) -> usize {
        (2.0 * self.spin).round() as usize + 1
    }
}

/// Polar angle between the static field and the defect symmetry axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    theta_rad: f64,
}

impl Orientation {
    pub fn from_radians(theta_rad: f64) -> Result<Self, SpinModelError> {
        if !(0.0..=std::f64::consts::PI).contains(&theta_rad) {
            return Err(SpinModelError::InvalidAngle(theta_rad));
        }
        Ok(Self { theta_rad })
    }

    pub fn from_degrees(theta_deg: f64) -> Result<Self, SpinModelError> {
        if !(0.0..=180.0).contains(&theta_deg) {
            return Err(SpinModelError::InvalidAngle(theta_deg.to_radians()));
        }
        // conversion can overshoot pi by an ulp at exactly 180 degrees
        Self::from_radians(theta_deg.to_radians().min(std::f64::consts::PI))
    }

    pub fn radians(&self) -> f64 {
        self.theta_rad
    }

    pub fn degrees(&self) -> f64 {
        self.theta_rad.to_degrees()
    }
}

/// Identity of the three allowed transitions of the S = 3/2 quartet,
/// named by their field position in the aligned geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionLabel {
    BMinus,
    BZero,
    BPlus,
}

impl TransitionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransitionLabel::BMinus => "B_minus",
            TransitionLabel::BZero => "B_zero",
            TransitionLabel::BPlus => "B_plus",
        }
    }
}

impl std::fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One hyperfine sub-line of a transition: field offset from the transition
/// centre and its statistical weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubLine {
    pub offset_mt: f64,
    pub weight: f64,
}

/// One resolved transition: centre field, expected signal phase under
/// optical pumping (+1 absorptive, -1 emissive) and its satellite pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub label: TransitionLabel,
    pub resonance_field_mt: f64,
    pub sign: i8,
    pub sub_lines: Vec<SubLine>,
}

/// The three resolved transitions at a fixed microwave frequency.
///
/// Transitions are kept in label order `B_minus, B_zero, B_plus`. The labels
/// follow the level indices of the sorted spectrum, not the field order, so
/// they stay stable when the outer transitions cross at the magic angle.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSet {
    pub transitions: Vec<Transition>,
    pub mw_frequency_ghz: f64,
}

impl TransitionSet {
    pub fn transition(&self, label: TransitionLabel) -> &Transition {
        self.transitions
            .iter()
            .find(|t| t.label == label)
            .expect("transition set always carries all three labels")
    }

    /// Signed outer splitting field(B_plus) - field(B_minus), mT.
    pub fn delta_b_mt(&self) -> f64 {
        self.transition(TransitionLabel::BPlus).resonance_field_mt
            - self.transition(TransitionLabel::BMinus).resonance_field_mt
    }
}

fn validate_spin(spin: f64) -> Result<(), SpinModelError> {
    let doubled = 2.0 * spin;
    if !(spin > 0.0) || (doubled - doubled.round()).abs() > 1e-9 {
        return Err(SpinModelError::InvalidSpin(spin));
    }
    Ok(())
}

/// Complex matrix acting on the spin multiplet.
pub type SpinMatrix = DMatrix<Complex<f64>>;

/// Angular-momentum matrices (Sx, Sy, Sz) of dimension 2 spin + 1 in the
/// standard |S, m> basis with m descending from +S.
pub fn spin_operators(
    spin: f64,
) -> Result<(SpinMatrix, SpinMatrix, SpinMatrix), SpinModelError> {
    validate_spin(spin)?;
    let n = (2.0 * spin).round() as usize + 1;
    let mut sx = DMatrix::zeros(n, n);
    let mut sy = DMatrix::zeros(n, n);
    let mut sz = DMatrix::zeros(n, n);
    for i in 0..n {
        let m = spin - i as f64;
        sz[(i, i)] = Complex::new(m, 0.0);
        if i + 1 < n {
            // ladder element <m+1| S+ |m> for the state below
            let m_low = spin - (i + 1) as f64;
            let c = (spin * (spin + 1.0) - m_low * (m_low + 1.0)).sqrt();
            sx[(i, i + 1)] = Complex::new(0.5 * c, 0.0);
            sx[(i + 1, i)] = Complex::new(0.5 * c, 0.0);
            sy[(i, i + 1)] = Complex::new(0.0, -0.5 * c);
            sy[(i + 1, i)] = Complex::new(0.0, 0.5 * c);
        }
    }
    Ok((sx, sy, sz))
}

/// Real Sx for the Hamiltonian (the tilted-field geometry never needs Sy).
fn sx_real(spin: f64) -> DMatrix<f64> {
    let n = (2.0 * spin).round() as usize + 1;
    let mut sx = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        let m_low = spin - (i + 1) as f64;
        let c = 0.5 * (spin * (spin + 1.0) - m_low * (m_low + 1.0)).sqrt();
        sx[(i, i + 1)] = c;
        sx[(i + 1, i)] = c;
    }
    sx
}

/// Spin Hamiltonian in MHz: Zeeman term for a field tilted by `theta` plus
/// the traceless axial zero-field-splitting term. Real symmetric.
pub fn build_hamiltonian(
    system: &SpinSystem,
    field_mt: f64,
    orient: Orientation,
) -> Result<DMatrix<f64>, SpinModelError> {
    if !(field_mt >= 0.0) {
        return Err(SpinModelError::NegativeField(field_mt));
    }
    let n = system.dimension();
    let spin = system.spin;
    let nu0 = system.zeeman_mhz_per_mt() * field_mt;
    let (sin_t, cos_t) = orient.radians().sin_cos();
    let casimir_third = spin * (spin + 1.0) / 3.0;

    let mut h = sx_real(spin) * (nu0 * sin_t);
    for i in 0..n {
        let m = spin - i as f64;
        h[(i, i)] += nu0 * cos_t * m + system.zfs_d_mhz * (m * m - casimir_third);
    }
    Ok(h)
}

/// Eigenvalues of the spin Hamiltonian in MHz, ascending.
pub fn energy_levels(
    system: &SpinSystem,
    field_mt: f64,
    orient: Orientation,
) -> Result<Vec<f64>, SpinModelError> {
    let h = build_hamiltonian(system, field_mt, orient)?;
    Ok(sorted_eigenvalues(&h))
}

fn sorted_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = h
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Exact resonance fields of the three allowed transitions at a fixed
/// microwave frequency, with pumping signs and hyperfine satellite weights.
///
/// Each field solves `E_(k+1)(B) - E_k(B) = h nu` for one adjacent pair of
/// the sorted spectrum. In the high-field regime the pair indices map onto
/// the transitions as top pair -> B_minus, middle -> B_zero, bottom ->
/// B_plus; keeping that index assignment at every angle is what carries the
/// labels adiabatically through the magic-angle degeneracy.
pub fn resonance_fields_exact(
    system: &SpinSystem,
    mw_frequency_ghz: f64,
    orient: Orientation,
) -> Result<TransitionSet, SpinModelError> {
    if !(mw_frequency_ghz > 0.0) {
        return Err(SpinModelError::InvalidFrequency(mw_frequency_ghz));
    }
    if (system.spin - 1.5).abs() > 1e-9 {
        return Err(SpinModelError::UnsupportedSpin(system.spin));
    }

    let nu_mhz = mw_frequency_ghz * 1e3;
    let lo = 1.0;
    let hi = 2.0 * nu_mhz / system.zeeman_mhz_per_mt();

    let probs = isotope_site_probabilities(system.abundance_i_half, system.n_neighbor_sites)
        .map_err(|e| SpinModelError::InvalidSystem(e.to_string()))?;
    let a = system.hyperfine_a_mt;
    let sub_lines = vec![
        SubLine { offset_mt: -a, weight: 0.5 * probs.p_one_satellite },
        SubLine { offset_mt: 0.0, weight: probs.p_central },
        SubLine { offset_mt: a, weight: 0.5 * probs.p_one_satellite },
    ];

    // (adjacent-pair index in the sorted spectrum, label, pumping sign)
    let assignments: [(usize, TransitionLabel, i8); 3] = [
        (2, TransitionLabel::BMinus, 1),
        (1, TransitionLabel::BZero, 1),
        (0, TransitionLabel::BPlus, -1),
    ];

    let mut transitions = Vec::with_capacity(3);
    for (pair, label, sign) in assignments {
        let gap = |b: f64| {
            let ev = energy_levels(system, b, orient).expect("bracket fields are non-negative");
            ev[pair + 1] - ev[pair] - nu_mhz
        };
        let field = bisect_with_secant_polish(&gap, lo, hi, FIELD_TOLERANCE_MT).ok_or(
            SpinModelError::NoResonance { label, lo_mt: lo, hi_mt: hi },
        )?;
        transitions.push(Transition {
            label,
            resonance_field_mt: field,
            sign,
            sub_lines: sub_lines.clone(),
        });
    }

    Ok(TransitionSet { transitions, mw_frequency_ghz })
}

/// Second Legendre angular factor 3 cos^2(theta) - 1.
pub(crate) fn second_legendre(theta_rad: f64) -> f64 {
    let c = theta_rad.cos();
    3.0 * c * c - 1.0
}

/// First-order splitting between the outer transitions,
/// `dB = 2 D (3 cos^2 theta - 1) / (g mu_B / h)`, in mT. Signed: positive
/// below the magic angle, maximal `2 ZFS` (in field units) in the aligned
/// geometry, and -1/2 of that at theta = pi/2.
pub fn splitting_first_order(system: &SpinSystem, orient: Orientation) -> f64 {
    2.0 * system.zfs_d_mhz * second_legendre(orient.radians()) / system.zeeman_mhz_per_mt()
}

/// The angle arccos(1/sqrt(3)) ~ 54.7356 deg where the first-order splitting
/// vanishes, in radians.
pub fn magic_angle() -> f64 {
    (1.0 / 3.0_f64.sqrt()).acos()
}

/// One row of an angular splitting sweep.
#[derive(Debug, Clone, Copy)]
pub struct SplittingSample {
    pub theta: Orientation,
    pub delta_b_exact_mt: f64,
    pub delta_b_first_order_mt: f64,
}

/// Exact and first-order outer splitting over a set of orientations.
pub fn splitting_sweep(
    system: &SpinSystem,
    mw_frequency_ghz: f64,
    thetas: &[Orientation],
) -> Result<Vec<SplittingSample>, SpinModelError> {
    thetas
        .iter()
        .map(|&theta| {
            let set = resonance_fields_exact(system, mw_frequency_ghz, theta)?;
            Ok(SplittingSample {
                theta,
                delta_b_exact_mt: set.delta_b_mt(),
                delta_b_first_order_mt: splitting_first_order(system, theta),
            })
        })
        .collect()
}

/// Bisection on a bracketing interval, then a secant polish from the final
/// bracket. The bisection guarantees the root to `tol`; the secant steps
/// sharpen it to near machine precision on smooth gap functions (exact for
/// the linear gaps of the aligned geometry).
fn bisect_with_secant_polish(
    f: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    let (orig_lo, orig_hi) = (lo, hi);

    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    let mut a = lo;
    let mut fa = f_lo;
    let mut b = hi;
    let mut fb = f(hi);
    for _ in 0..12 {
        if fb == fa {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        if !c.is_finite() || c < orig_lo || c > orig_hi {
            break;
        }
        let fc = f(c);
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        if fc == 0.0 || (b - a).abs() < 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    Some(b)
}
