//! Photonic crystal cavity geometry: defect lattice generation, global
//! scaling, emitter-placement cooperativity maps and waveguide-coupling
//! trade-off searches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CqedParams;
use crate::response::{cooperativity_from_geometry, purcell_factor, response_amplitudes};
use crate::search::grid_then_golden_min;

/// Nanobeam cavity geometry. Lengths in nm; `d` is the fractional lattice
/// deviation of the defect and `eta` the steepness of its power-law ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityDesign {
    /// Nominal lattice constant (nm).
    pub a: f64,
    /// Hole radius (nm).
    pub r: f64,
    /// Waveguide width (nm).
    pub w_wg: f64,
    /// Membrane thickness (nm); never rescaled.
    pub t_h: f64,
    /// Fractional lattice-constant reduction at the defect center.
    pub d: f64,
    /// Power-law exponent of the defect ramp.
    pub eta: f64,
    /// Defect unit cells per side.
    pub n: usize,
    /// Strong-mirror cells (back reflector).
    pub m_s: usize,
    /// Weak-mirror cells (waveguide out-coupling side).
    pub m_w: usize,
    /// Taper cells ramping the radius down toward the waveguide.
    pub l: usize,
    /// Final taper hole radius (nm).
    pub r_min_wg: f64,
    /// Percent scaling already applied to {a, r, w_wg}.
    pub scaling: f64,
}

impl Default for CavityDesign {
    fn default() -> Self {
        CavityDesign {
            a: 206.0,
            r: 71.0,
            w_wg: 275.0,
            t_h: 230.0,
            d: 0.1,
            eta: 1.05,
            n: 7,
            m_s: 13,
            m_w: 3,
            l: 6,
            r_min_wg: 25.0,
            scaling: 100.0,
        }
    }
}

impl CavityDesign {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("r", self.r),
            ("w_wg", self.w_wg),
            ("t_h", self.t_h),
            ("r_min_wg", self.r_min_wg),
            ("eta", self.eta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.d) {
            return Err(Error::Domain(format!("d must be in [0, 1), got {}", self.d)));
        }
        if self.n == 0 {
            return Err(Error::Domain("need at least one defect cell per side".into()));
        }
        if !(1..=6).contains(&self.m_w) {
            return Err(Error::Domain(format!(
                "weak mirror cells must be in [1, 6], got {}",
                self.m_w
            )));
        }
        Ok(())
    }
}

/// Which section of the device a hole belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Strong,
    Defect,
    Weak,
    Taper,
}

/// One etched hole of the generated device.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Hole {
    /// Center position along the beam (nm).
    pub x_nm: f64,
    pub radius_nm: f64,
    /// Lattice constant of the cell this hole starts (nm).
    pub a_nm: f64,
    pub region: Region,
}

/// Defect lattice constants and the assembled hole sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefectLattice {
    /// a_i for i = 0 (defect center) through N (nominal).
    pub a_defect: Vec<f64>,
    /// All holes, strong mirror through taper, centers increasing.
    pub holes: Vec<Hole>,
}

impl DefectLattice {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::Json)
    }
}

/// Smooth ramp y(x): a power law glued to its point reflection so the
/// composite has matching value and slope at x = 1/2.
fn ramp(x: f64, eta: f64) -> f64 {
    if x <= 0.5 {
        0.5 * (2.0 * x).powf(eta)
    } else {
        1.0 - 0.5 * (2.0 * (1.0 - x)).powf(eta)
    }
}

/// Per-cell defect lattice constant a_i = a(1 − d(2y³ − 3y² + 1)). The
/// cubic has zero slope at both ends, so the lattice joins the mirrors
/// with a continuous derivative.
fn defect_a(design: &CavityDesign, i: usize) -> f64 {
    let y = ramp(i as f64 / design.n as f64, design.eta);
    design.a * (1.0 - design.d * (2.0 * y.powi(3) - 3.0 * y.powi(2) + 1.0))
}

/// Generate the full device hole sequence: strong mirror, mirrored defect
/// (both sides share the center cell), weak mirror, then a taper whose
/// radius ramps linearly down to `r_min_wg` at constant lattice constant.
pub fn defect_lattice(design: &CavityDesign) -> Result<DefectLattice> {
    design.validate()?;
    let n = design.n;
    let a_defect: Vec<f64> = (0..=n).map(|i| defect_a(design, i)).collect();

    // (a of the cell, radius, region) from the back mirror to the waveguide
    let mut cells: Vec<(f64, f64, Region)> = Vec::new();
    for _ in 0..design.m_s {
        cells.push((design.a, design.r, Region::Strong));
    }
    for i in (1..=n).rev() {
        cells.push((a_defect[i], design.r, Region::Defect));
    }
    cells.push((a_defect[0], design.r, Region::Defect));
    for i in 1..=n {
        cells.push((a_defect[i], design.r, Region::Defect));
    }
    for _ in 0..design.m_w {
        cells.push((design.a, design.r, Region::Weak));
    }
    for j in 0..design.l {
        let frac = (j + 1) as f64 / design.l.max(1) as f64;
        let radius = design.r + (design.r_min_wg - design.r) * frac;
        cells.push((design.a, radius, Region::Taper));
    }

    let mut holes = Vec::with_capacity(cells.len());
    let mut x = 0.0;
    for (a_cell, radius, region) in cells {
        holes.push(Hole {
            x_nm: x,
            radius_nm: radius,
            a_nm: a_cell,
            region,
        });
        x += a_cell;
    }
    Ok(DefectLattice { a_defect, holes })
}

/// Rescale {a, r, w_wg} by `scaling` percent; thickness is set by the
/// wafer and stays fixed.
pub fn scale_design(design: &CavityDesign, scaling: f64) -> Result<CavityDesign> {
    design.validate()?;
    if !(90.0..=115.0).contains(&scaling) {
        return Err(Error::Domain(format!(
            "scaling must be within [90, 115] percent, got {scaling}"
        )));
    }
    let s = scaling / 100.0;
    Ok(CavityDesign {
        a: design.a * s,
        r: design.r * s,
        w_wg: design.w_wg * s,
        scaling: design.scaling * s,
        ..*design
    })
}

/// Emitter dipole orientations in the device frame (beam along x, in-plane
/// transverse y, normal z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DipoleOrientation {
    /// (0, √2, 1)/√3 — in-plane transverse projection.
    Transversal,
    /// (√2, 0, 1)/√3 — along the beam.
    Axial,
    /// (1, 1, 1)/√3 — a ⟨100⟩-like direction.
    Hundred,
}

impl DipoleOrientation {
    pub fn unit_vector(&self) -> [f64; 3] {
        let s = 3.0f64.sqrt();
        match self {
            DipoleOrientation::Transversal => [0.0, 2.0f64.sqrt() / s, 1.0 / s],
            DipoleOrientation::Axial => [2.0f64.sqrt() / s, 0.0, 1.0 / s],
            DipoleOrientation::Hundred => [1.0 / s, 1.0 / s, 1.0 / s],
        }
    }
}

fn check_unit(v: &[f64; 3], what: &str) -> Result<()> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("{what} must be a unit vector, |v| = {norm}")));
    }
    Ok(())
}

/// ζ = |d̂·Ê|²: the dipole's projection onto the local field direction.
pub fn polarization_mismatch(dipole: DipoleOrientation, e_hat: &[f64; 3]) -> Result<f64> {
    check_unit(e_hat, "field direction")?;
    let d = dipole.unit_vector();
    let dot = d[0] * e_hat[0] + d[1] * e_hat[1] + d[2] * e_hat[2];
    Ok(dot * dot)
}

/// One sample of a simulated cavity mode field.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FieldSample {
    /// Position (nm).
    pub position: [f64; 3],
    /// Normalized intensity ε|E|²/max, in [0, 1].
    pub u_sq: f64,
    /// Local field direction, unit norm.
    pub e_hat: [f64; 3],
}

impl FieldSample {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.u_sq) {
            return Err(Error::Domain(format!("u_sq must be in [0, 1], got {}", self.u_sq)));
        }
        check_unit(&self.e_hat, "e_hat")
    }
}

/// Read a field grid from CSV with columns x_nm,y_nm,z_nm,u_sq,ex,ey,ez.
pub fn field_samples_from_csv<R: std::io::Read>(reader: R) -> Result<Vec<FieldSample>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(Error::Csv)?
        .clone();
    let expect = ["x_nm", "y_nm", "z_nm", "u_sq", "ex", "ey", "ez"];
    if headers.iter().collect::<Vec<_>>() != expect {
        return Err(Error::Data(format!(
            "field CSV header must be {:?}, got {:?}",
            expect.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::Csv)?;
        let mut vals = [0.0f64; 7];
        for (k, field) in rec.iter().enumerate().take(7) {
            vals[k] = field.trim().parse().map_err(|_| {
                Error::Data(format!("line {}: cannot parse '{}' as a number", idx + 2, field))
            })?;
        }
        let sample = FieldSample {
            position: [vals[0], vals[1], vals[2]],
            u_sq: vals[3],
            e_hat: [vals[4], vals[5], vals[6]],
        };
        sample
            .validate()
            .map_err(|e| Error::Data(format!("line {}: {e}", idx + 2)))?;
        out.push(sample);
    }
    Ok(out)
}

/// Per-sample cooperativity C(x) = F_p(Q, V)·β0·u²(x)·|d̂·Ê(x)|².
pub fn cooperativity_map(
    samples: &[FieldSample],
    q: f64,
    v_norm: f64,
    beta0: f64,
    dipole: DipoleOrientation,
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Domain("field grid is empty".into()));
    }
    let f_p = purcell_factor(q, v_norm)?;
    samples
        .iter()
        .map(|s| {
            s.validate()?;
            let zeta = polarization_mismatch(dipole, &s.e_hat)?;
            cooperativity_from_geometry(f_p, beta0, s.u_sq, zeta)
        })
        .collect()
}

/// A level line of the waveguide-coupling map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Contour {
    /// "beta_e" or "tau_ns".
    pub kind: String,
    pub level: f64,
    /// (κ_e, κ_i) polyline vertices (GHz).
    pub points: Vec<(f64, f64)>,
}

/// β_e and Purcell lifetime over a (κ_e, κ_i) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaMap {
    pub kappa_e: Vec<f64>,
    pub kappa_i: Vec<f64>,
    /// Row per κ_i, column per κ_e.
    pub beta_e: Vec<Vec<f64>>,
    /// Row per κ_i, column per κ_e (ns).
    pub tau_ns: Vec<Vec<f64>>,
    pub contours: Vec<Contour>,
}

/// Map β_e = (κ_e/κ)·C/(C+1) and τ = τ0/(C+1) with κ = κ_e + κ_i,
/// C = 4g²/(κγ0), over the supplied grids, plus analytic iso-contours.
///
/// τ contours are straight lines κ_e + κ_i = 4g²/(γ0(τ0/τ − 1)); β_e
/// contours solve a quadratic in κ_e per κ_i sample, giving up to two
/// branches on either side of the coupling optimum.
pub fn external_beta_map(
    kappa_e_grid: &[f64],
    kappa_i_grid: &[f64],
    g: f64,
    gamma0: f64,
    tau0_ns: f64,
    beta_e_levels: &[f64],
    tau_levels_ns: &[f64],
) -> Result<BetaMap> {
    if kappa_e_grid.is_empty() || kappa_i_grid.is_empty() {
        return Err(Error::Domain("coupling grids must be non-empty".into()));
    }
    for &v in kappa_e_grid.iter().chain(kappa_i_grid) {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("grid rates must be positive, got {v}")));
        }
    }
    if !(g > 0.0 && gamma0 > 0.0 && tau0_ns > 0.0) {
        return Err(Error::Domain("g, gamma0 and tau0 must be positive".into()));
    }
    let a = 4.0 * g * g / gamma0; // C = a/κ
    let mut beta_e = Vec::with_capacity(kappa_i_grid.len());
    let mut tau_ns = Vec::with_capacity(kappa_i_grid.len());
    for &ki in kappa_i_grid {
        let mut row_b = Vec::with_capacity(kappa_e_grid.len());
        let mut row_t = Vec::with_capacity(kappa_e_grid.len());
        for &ke in kappa_e_grid {
            let kappa = ke + ki;
            let c = a / kappa;
            row_b.push((ke / kappa) * c / (c + 1.0));
            row_t.push(tau0_ns / (c + 1.0));
        }
        beta_e.push(row_b);
        tau_ns.push(row_t);
    }

    let ke_lo = kappa_e_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let ke_hi = kappa_e_grid.iter().cloned().fold(0.0f64, f64::max);
    let mut contours = Vec::new();
    for &tau in tau_levels_ns {
        if !(tau > 0.0 && tau < tau0_ns) {
            continue; // level unreachable: τ can only lie below τ0
        }
        let kappa_level = a / (tau0_ns / tau - 1.0);
        let mut points = Vec::new();
        for &ki in kappa_i_grid {
            let ke = kappa_level - ki;
            if ke >= ke_lo && ke <= ke_hi {
                points.push((ke, ki));
            }
        }
        if !points.is_empty() {
            contours.push(Contour {
                kind: "tau_ns".to_string(),
                level: tau,
                points,
            });
        }
    }
    for &b in beta_e_levels {
        if !(b > 0.0 && b < 1.0) {
            continue;
        }
        // b(κe+κi)² + bA(κe+κi) = Aκe, quadratic in κe
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for &ki in kappa_i_grid {
            let qa = b;
            let qb = 2.0 * b * ki + b * a - a;
            let qc = b * (ki * ki + a * ki);
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let r1 = (-qb - sq) / (2.0 * qa);
            let r2 = (-qb + sq) / (2.0 * qa);
            if r1 >= ke_lo && r1 <= ke_hi {
                lower.push((r1, ki));
            }
            if r2 >= ke_lo && r2 <= ke_hi {
                upper.push((r2, ki));
            }
        }
        for points in [lower, upper] {
            if !points.is_empty() {
                contours.push(Contour {
                    kind: "beta_e".to_string(),
                    level: b,
                    points,
                });
            }
        }
    }
    Ok(BetaMap {
        kappa_e: kappa_e_grid.to_vec(),
        kappa_i: kappa_i_grid.to_vec(),
        beta_e,
        tau_ns,
        contours,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimalCoupling {
    pub kappa_e_star: f64,
    pub beta_e_star: f64,
}

/// Maximize β_e over κ_e at fixed κ_i: κ_e* = √(κ_i(κ_i + 4g²/γ0)).
pub fn optimal_kappa_e(kappa_i: f64, g: f64, gamma0: f64) -> Result<OptimalCoupling> {
    if !(kappa_i > 0.0 && g > 0.0 && gamma0 > 0.0) {
        return Err(Error::Domain("kappa_i, g and gamma0 must be positive".into()));
    }
    let a = 4.0 * g * g / gamma0;
    let ke = (kappa_i * (kappa_i + a)).sqrt();
    let kappa = ke + kappa_i;
    let c = a / kappa;
    Ok(OptimalCoupling {
        kappa_e_star: ke,
        beta_e_star: (ke / kappa) * c / (c + 1.0),
    })
}

/// Per-detuning extrema of the reflection spectrum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReflectionEnvelope {
    pub delta_ce: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Frequency of the reflection minimum relative to the emitter (GHz).
    pub omega_at_min: f64,
}

/// Reflection |r(ω)|² extrema at a fixed cavity-emitter detuning. The
/// emitter stays at `params.omega_a`; the cavity is moved to ω_a + Δce.
/// Scans ω over the cavity line plus a dense window around the narrow
/// emitter feature.
pub fn reflection_envelope(params: &CqedParams, delta_ce: f64) -> Result<ReflectionEnvelope> {
    let p = CqedParams {
        omega_c: params.omega_a + delta_ce,
        ..*params
    };
    p.validate()?;
    let r_of = |w: f64| response_amplitudes(w, &p).map(|r| r.big_r).unwrap_or(f64::INFINITY);
    let kappa = p.kappa;
    let lo = p.omega_a.min(p.omega_c) - 1.5 * kappa;
    let hi = p.omega_a.max(p.omega_c) + 1.5 * kappa;
    // narrow emitter feature width: γ(C_coh + 1)
    let coop = crate::response::cooperativities(&p)?;
    let feat = (p.gamma() * (coop.c_coh + 1.0)).max(1e-9);
    let (w_lo, w_hi) = (p.omega_a - 5.0 * feat, p.omega_a + 5.0 * feat);

    let (x1, v1) = grid_then_golden_min(r_of, lo, hi, 801, 1e-9)?;
    let (x2, v2) = grid_then_golden_min(r_of, w_lo, w_hi, 401, 1e-9)?;
    let (omega_at_min, r_min) = if v1 <= v2 { (x1, v1) } else { (x2, v2) };

    let neg = |w: f64| -r_of(w);
    let (_, nv1) = grid_then_golden_min(neg, lo, hi, 801, 1e-9)?;
    let (_, nv2) = grid_then_golden_min(neg, w_lo, w_hi, 401, 1e-9)?;
    let r_max = (-nv1).max(-nv2);
    Ok(ReflectionEnvelope {
        delta_ce,
        r_min,
        r_max,
        omega_at_min: omega_at_min - p.omega_a,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DipSearch {
    pub min_reflection: f64,
    pub at_delta_ce: f64,
    /// Frequency of the minimum relative to the emitter (GHz).
    pub at_omega: f64,
}

/// Deepest reflection dip over cavity-emitter detunings in
/// `[dce_lo, dce_hi]`: a grid prescan over Δce with golden refinement,
/// each inner evaluation being a bounded minimization over ω.
pub fn dip_search(params: &CqedParams, dce_lo: f64, dce_hi: f64) -> Result<DipSearch> {
    params.validate()?;
    if !(dce_hi > dce_lo) {
        return Err(Error::Domain("detuning range must have dce_hi > dce_lo".into()));
    }
    let inner = |dce: f64| -> f64 {
        reflection_envelope(params, dce)
            .map(|e| e.r_min)
            .unwrap_or(f64::INFINITY)
    };
    let (at_delta_ce, min_reflection) = grid_then_golden_min(inner, dce_lo, dce_hi, 101, 1e-6)?;
    if !min_reflection.is_finite() {
        return Err(Error::Numeric("reflection search did not converge".into()));
    }
    let env = reflection_envelope(params, at_delta_ce)?;
    Ok(DipSearch {
        min_reflection,
        at_delta_ce,
        at_omega: env.omega_at_min,
    })
}
