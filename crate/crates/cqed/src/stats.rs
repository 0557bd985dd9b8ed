//! Device registry and fleet statistics: yield, quality-factor
//! distributions with resolution censoring, and per-scaling / per-dose
//! resonance grouping.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::SampledTrace;

/// Exclusion and measurement flags carried by a device.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceFlags {
    pub visually_broken: bool,
    pub no_resonance: bool,
    pub not_in_reflection: bool,
    pub q_censored: bool,
}

/// Registry entry for one fabricated device: identity, design metadata,
/// trace file paths, and (when fitted) resonance summary numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviceRecord {
    pub sample_id: String,
    pub array_id: String,
    pub device_id: String,
    /// Geometry scaling in percent.
    pub scaling: f64,
    /// Weak mirror cells.
    pub m_w: u32,
    /// E-beam dose (µC/cm²), when recorded.
    #[serde(default)]
    pub dose: Option<f64>,
    /// Named trace files belonging to this device.
    #[serde(default)]
    pub trace_paths: BTreeMap<String, String>,
    #[serde(default)]
    pub flags: DeviceFlags,
    /// Fundamental resonance wavelength (nm), when found.
    #[serde(default)]
    pub resonance_nm: Option<f64>,
    /// Fitted resonance FWHM (nm).
    #[serde(default)]
    pub fwhm_nm: Option<f64>,
    /// Fitted quality factor.
    #[serde(default)]
    pub q: Option<f64>,
}

/// Parse a registry manifest: a JSON array of device records.
pub fn manifest_from_json(json: &str) -> Result<Vec<DeviceRecord>> {
    let records: Vec<DeviceRecord> = serde_json::from_str(json).map_err(Error::Json)?;
    for r in &records {
        if let (true, Some(fwhm)) = (r.flags.q_censored, r.fwhm_nm) {
            if fwhm > DEFAULT_RESOLUTION_FLOOR_NM * 10.0 {
                return Err(Error::Data(format!(
                    "device {}/{}/{}: q_censored but FWHM {fwhm} nm is well above any resolution bound",
                    r.sample_id, r.array_id, r.device_id
                )));
            }
        }
    }
    Ok(records)
}

const DEFAULT_RESOLUTION_FLOOR_NM: f64 = 0.021;

/// Mean resonance per group key (scaling percent or dose).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub key: f64,
    pub mean_resonance_nm: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetStats {
    pub investigated: usize,
    pub with_resonance: usize,
    pub visually_broken: usize,
    pub no_resonance: usize,
    pub not_in_reflection: usize,
    /// with_resonance / investigated.
    pub yield_fraction: f64,
    /// Yield rounded to one decimal percent, for display.
    pub yield_percent: f64,
    /// Mean and std over Q values whose FWHM resolves above the bound.
    pub q_mean: Option<f64>,
    pub q_std: Option<f64>,
    pub q_count: usize,
    /// Devices whose FWHM sits at or below the resolution bound: their Q
    /// values are lower bounds and are excluded from the moments above.
    pub q_censored_count: usize,
    /// Histogram of resolved Q values: (bin lower edge, count).
    pub q_histogram: Vec<(f64, usize)>,
    pub per_scaling: Vec<GroupStat>,
    pub per_dose: Vec<GroupStat>,
}

fn group_by<F: Fn(&DeviceRecord) -> Option<f64>>(
    records: &[DeviceRecord],
    key_of: F,
) -> Vec<GroupStat> {
    // f64 keys ordered through their bit pattern; keys come from a finite
    // set of design values so exact equality grouping is intended
    let mut groups: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in records {
        if let (Some(key), Some(res)) = (key_of(r), r.resonance_nm) {
            let e = groups.entry(key.to_bits()).or_insert((key, 0.0, 0));
            e.1 += res;
            e.2 += 1;
        }
    }
    let mut out: Vec<GroupStat> = groups
        .into_values()
        .map(|(key, sum, count)| GroupStat {
            key,
            mean_resonance_nm: sum / count as f64,
            count,
        })
        .collect();
    out.sort_by(|a, b| a.key.total_cmp(&b.key));
    out
}

/// Summarize a device batch. Q statistics use only devices whose fitted
/// FWHM resolves above `resolution_nm` (default 0.021 nm); narrower lines
/// are counted as censored lower bounds.
pub fn fleet_statistics(records: &[DeviceRecord], resolution_nm: Option<f64>) -> Result<FleetStats> {
    if records.is_empty() {
        return Err(Error::Domain("empty device batch".into()));
    }
    let resolution = resolution_nm.unwrap_or(DEFAULT_RESOLUTION_FLOOR_NM);
    let investigated = records.len();
    let with_resonance = records.iter().filter(|r| r.resonance_nm.is_some()).count();
    let visually_broken = records.iter().filter(|r| r.flags.visually_broken).count();
    let no_resonance = records.iter().filter(|r| r.flags.no_resonance).count();
    let not_in_reflection = records.iter().filter(|r| r.flags.not_in_reflection).count();
    let yield_fraction = with_resonance as f64 / investigated as f64;

    let mut resolved: Vec<f64> = Vec::new();
    let mut censored = 0usize;
    for r in records {
        if let Some(q) = r.q {
            let below = r.fwhm_nm.map(|f| f <= resolution).unwrap_or(false) || r.flags.q_censored;
            if below {
                censored += 1;
            } else {
                resolved.push(q);
            }
        }
    }
    resolved.sort_by(f64::total_cmp);
    let (q_mean, q_std) = if resolved.is_empty() {
        (None, None)
    } else {
        let n = resolved.len() as f64;
        let mean = resolved.iter().sum::<f64>() / n;
        let var = resolved.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / n;
        (Some(mean), Some(var.sqrt()))
    };
    let q_histogram = if resolved.is_empty() {
        Vec::new()
    } else {
        let lo = resolved[0];
        let hi = resolved[resolved.len() - 1];
        let width = ((hi - lo) / 10.0).max(f64::MIN_POSITIVE);
        let mut bins = vec![0usize; 10];
        for &q in &resolved {
            let k = (((q - lo) / width) as usize).min(9);
            bins[k] += 1;
        }
        bins.into_iter()
            .enumerate()
            .map(|(k, c)| (lo + k as f64 * width, c))
            .collect()
    };

    Ok(FleetStats {
        investigated,
        with_resonance,
        visually_broken,
        no_resonance,
        not_in_reflection,
        yield_fraction,
        yield_percent: (yield_fraction * 1000.0).round() / 10.0,
        q_mean,
        q_std,
        q_count: resolved.len(),
        q_censored_count: censored,
        q_histogram,
        per_scaling: group_by(records, |r| Some(r.scaling)),
        per_dose: group_by(records, |r| r.dose),
    })
}

/// Bright/dark call from a phonon-sideband trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitterState {
    Bright,
    Dark,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Classification {
    pub state: EmitterState,
    /// Set when the trace carried no signal at all.
    pub low_confidence: bool,
}

/// Bright iff the peak amplitude is at least `threshold_multiple` (default
/// 3) times the trace median; ties count as bright.
pub fn classify_bright_dark(
    trace: &SampledTrace,
    threshold_multiple: Option<f64>,
) -> Result<Classification> {
    let mult = threshold_multiple.unwrap_or(3.0);
    if !(mult > 0.0) {
        return Err(Error::Domain(format!("threshold multiple must be positive, got {mult}")));
    }
    if trace.y.is_empty() {
        return Err(Error::Domain("empty trace".into()));
    }
    let peak = trace.y.iter().cloned().fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Ok(Classification {
            state: EmitterState::Dark,
            low_confidence: true,
        });
    }
    let mut sorted = trace.y.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let state = if peak >= mult * median {
        EmitterState::Bright
    } else {
        EmitterState::Dark
    };
    Ok(Classification {
        state,
        low_confidence: false,
    })
}
