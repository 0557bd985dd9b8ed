//! `cqed` — command-line driver: synthetic simulation, trace fitting,
//! cavity design exploration, fleet statistics and report assembly.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cqed::bloch::{integrate, BlochState, DriveSpec};
use cqed::design::{defect_lattice, dip_search, external_beta_map, scale_design, CavityDesign};
use cqed::fit::{
    fit_exponential_decay, fit_lifetime_vs_detuning, fit_linewidth_vs_detuning,
    fit_lorentzian_linear, fit_reflection, fit_transmission_spectrum, TransmissionFixed,
};
use cqed::params::CqedParams;
use cqed::plotdata::{emit_view, ViewConfig};
use cqed::report::{assemble_report, ReportInputs};
use cqed::stats::{classify_bright_dark, fleet_statistics, manifest_from_json};
use cqed::trace::SampledTrace;
use cqed::{synth, Error};

#[derive(Parser)]
#[command(name = "cqed", version, about = "Cavity QED toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct IoArgs {
    /// Input file (CSV trace or JSON manifest, per subcommand).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for synthetic noise.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format for tabular results.
    #[arg(long, global = true, default_value = "json", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic traces or model curves.
    Simulate {
        #[command(subcommand)]
        what: SimulateCmd,
    },
    /// Fit a measured or synthetic trace.
    Fit {
        #[command(subcommand)]
        what: FitCmd,
    },
    /// Cavity geometry and coupling exploration.
    Design {
        #[command(subcommand)]
        what: DesignCmd,
    },
    /// Fleet statistics over a device manifest.
    Stats,
    /// Assemble the derived-parameter report from fitted inputs.
    Report,
    /// Classify a phonon-sideband trace as bright or dark.
    Classify,
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Emitter-modulated transmission scan with optional noise.
    Spectrum,
    /// Integrate the optical Bloch equations.
    Bloch,
    /// Emit a named figure view ("fig2c" ... "fig14").
    FigViews { view: String },
}

#[derive(Subcommand)]
enum FitCmd {
    /// Lorentzian line on a linear background (wavelength spectrum).
    Lorentzian,
    /// Single-exponential decay (time histogram).
    Lifetime,
    /// Purcell lifetime versus detuning series.
    LifetimeVsDetuning,
    /// Broadened linewidth versus detuning series.
    LinewidthVsDetuning,
    /// Driven cavity transmission lineshape.
    Transmission,
    /// Bare-cavity reflection dip.
    Reflection,
}

#[derive(Subcommand)]
enum DesignCmd {
    /// Defect lattice constants and the full hole sequence.
    Lattice,
    /// External beta factor map with contours.
    BetaMap,
    /// Deepest reflection dip over cavity-emitter detunings.
    DipSearch,
    /// Rescale a design by a percent factor.
    Scale { scaling: f64 },
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct SpectrumConfig {
    g: f64,
    kappa: f64,
    gamma: f64,
    omega_c: f64,
    omega_a: f64,
    scale: f64,
    noise_rel: f64,
}

impl SpectrumConfig {
    fn or_flagship(self) -> Self {
        SpectrumConfig {
            g: if self.g > 0.0 { self.g } else { 1.94 },
            kappa: if self.kappa > 0.0 { self.kappa } else { 19.0 },
            gamma: if self.gamma > 0.0 { self.gamma } else { 0.0975 },
            scale: if self.scale > 0.0 { self.scale } else { 1000.0 },
            ..self
        }
    }
}

#[derive(Deserialize)]
struct BlochConfig {
    g: f64,
    kappa: f64,
    kappa_e: f64,
    gamma0: f64,
    #[serde(default)]
    gamma_dep: f64,
    y_re: f64,
    #[serde(default)]
    y_im: f64,
    #[serde(default)]
    delta: f64,
    #[serde(default)]
    delta_c: f64,
    t_end_ns: f64,
    dt_ns: f64,
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct FitConfig {
    /// Lorentzian: spectrometer resolution (nm).
    resolution_nm: Option<f64>,
    /// Lifetime: fit window start (ns) and optional IRF width (ns).
    t_start: Option<f64>,
    irf_sigma: Option<f64>,
    /// Detuning series: cavity linewidth (GHz) and excluded indices.
    kappa: Option<f64>,
    exclude: Vec<usize>,
    /// Transmission: parameters held fixed.
    fixed_g: Option<f64>,
    fixed_kappa: Option<f64>,
    fixed_gamma: Option<f64>,
    fixed_omega_c: Option<f64>,
    fixed_omega_a: Option<f64>,
    /// Reflection: known background level.
    background: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct DesignConfig {
    design: Option<CavityDesign>,
    /// Beta map axes and levels.
    g: Option<f64>,
    gamma0: Option<f64>,
    tau0_ns: Option<f64>,
    kappa_e_max: Option<f64>,
    kappa_i_max: Option<f64>,
    beta_e_levels: Vec<f64>,
    tau_levels_ns: Vec<f64>,
    /// Dip search response parameters and detuning range.
    params: Option<CqedParams>,
    dce_lo: Option<f64>,
    dce_hi: Option<f64>,
}

fn read_input(io: &IoArgs) -> Result<String, Error> {
    match &io.input {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn read_trace(io: &IoArgs) -> Result<SampledTrace, Error> {
    let text = read_input(io)?;
    SampledTrace::from_csv_reader(text.as_bytes())
}

fn read_config<T: serde::de::DeserializeOwned + Default>(io: &IoArgs) -> Result<T, Error> {
    match &io.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("cannot parse {}: {e}", p.display())))
        }
        None => Ok(T::default()),
    }
}

fn read_required_config<T: serde::de::DeserializeOwned>(io: &IoArgs) -> Result<T, Error> {
    let p = io
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this subcommand requires --config".into()))?;
    let text = std::fs::read_to_string(p)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("cannot parse {}: {e}", p.display())))
}

fn write_output(io: &IoArgs, content: &str) -> Result<(), Error> {
    match &io.output {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// Points of a detuning series trace: (detuning, value).
fn trace_points(trace: &SampledTrace) -> Vec<(f64, f64)> {
    trace.x.iter().cloned().zip(trace.y.iter().cloned()).collect()
}

fn fit_output(io: &IoArgs, result: serde_json::Value) -> Result<String, Error> {
    if io.format == "csv" {
        let names = result["names"].as_array().cloned().unwrap_or_default();
        let values = result["values"].as_array().cloned().unwrap_or_default();
        let stderr = result["stderr"].as_array().cloned().unwrap_or_default();
        let mut out = String::from("name,value,stderr\n");
        for i in 0..names.len() {
            out.push_str(&format!(
                "{},{:.8e},{:.8e}\n",
                names[i].as_str().unwrap_or(""),
                values[i].as_f64().unwrap_or(f64::NAN),
                stderr[i].as_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(out)
    } else {
        Ok(format!("{:#}\n", result))
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let io = &cli.io;
    match &cli.command {
        Command::Simulate { what } => match what {
            SimulateCmd::Spectrum => {
                let cfg: SpectrumConfig = read_config::<SpectrumConfig>(io)?.or_flagship();
                let trace = synth::transmission_scan(
                    cfg.g, cfg.kappa, cfg.gamma, cfg.omega_c, cfg.omega_a, cfg.scale,
                    cfg.noise_rel, io.seed,
                );
                write_output(io, &trace.to_csv_string())
            }
            SimulateCmd::Bloch => {
                let cfg: BlochConfig = read_required_config(io)?;
                let params = CqedParams::new(
                    cfg.g, cfg.kappa, cfg.kappa_e, cfg.gamma0, cfg.gamma_dep, 0.0, 0.0,
                )?;
                let drive = DriveSpec {
                    y: num_complex_y(cfg.y_re, cfg.y_im),
                    delta: cfg.delta,
                    delta_c: cfg.delta_c,
                };
                let traj = integrate(BlochState::GROUND, &drive, &params, cfg.t_end_ns, cfg.dt_ns)?;
                let mut out = String::from("time_ns,re_sigma_ge,im_sigma_ge,sigma_z\n");
                for s in &traj.samples {
                    out.push_str(&format!(
                        "{:.8e},{:.8e},{:.8e},{:.8e}\n",
                        s.t, s.state.sigma_ge.re, s.state.sigma_ge.im, s.state.sigma_z
                    ));
                }
                write_output(io, &out)
            }
            SimulateCmd::FigViews { view } => {
                let cfg: ViewConfig = read_config(io)?;
                let set = emit_view(view, &cfg)?;
                let content = if io.format == "csv" {
                    set.to_csv_string()
                } else {
                    set.to_json()? + "\n"
                };
                write_output(io, &content)
            }
        },
        Command::Fit { what } => {
            let cfg: FitConfig = read_config(io)?;
            let trace = read_trace(io)?;
            let json = match what {
                FitCmd::Lorentzian => {
                    let fit = fit_lorentzian_linear(&trace, cfg.resolution_nm, None)?;
                    let mut v = fit.result.to_json();
                    v["q"] = fit.q.into();
                    v["q_stderr"] = fit.q_stderr.into();
                    v["q_censored"] = fit.q_censored.into();
                    v
                }
                FitCmd::Lifetime => fit_exponential_decay(
                    &trace,
                    cfg.t_start.unwrap_or(trace.x[0]),
                    cfg.irf_sigma,
                    None,
                )?
                .to_json(),
                FitCmd::LifetimeVsDetuning => {
                    let kappa = cfg.kappa.ok_or_else(|| {
                        Error::Config("lifetime-vs-detuning needs 'kappa' in --config".into())
                    })?;
                    fit_lifetime_vs_detuning(&trace_points(&trace), kappa, &cfg.exclude, None)?
                        .to_json()
                }
                FitCmd::LinewidthVsDetuning => {
                    let kappa = cfg.kappa.ok_or_else(|| {
                        Error::Config("linewidth-vs-detuning needs 'kappa' in --config".into())
                    })?;
                    let fit = fit_linewidth_vs_detuning(&trace_points(&trace), kappa, None)?;
                    let mut v = fit.result.to_json();
                    v["g"] = fit.g.into();
                    v["g_stderr"] = fit.g_stderr.into();
                    v
                }
                FitCmd::Transmission => {
                    let fixed = TransmissionFixed {
                        g: cfg.fixed_g,
                        kappa: cfg.fixed_kappa,
                        gamma: cfg.fixed_gamma,
                        omega_c: cfg.fixed_omega_c,
                        omega_a: cfg.fixed_omega_a,
                    };
                    let fit = fit_transmission_spectrum(&trace, &fixed, None)?;
                    let mut v = fit.result.to_json();
                    v["dip_contrast"] = fit.dip_contrast.into();
                    v
                }
                FitCmd::Reflection => {
                    let background = cfg.background.ok_or_else(|| {
                        Error::Config("reflection needs 'background' in --config".into())
                    })?;
                    let fit = fit_reflection(&trace, background, None)?;
                    let mut v = fit.result.to_json();
                    v["ambiguous_branch"] = fit.ambiguous_branch.into();
                    v
                }
            };
            let content = fit_output(io, json)?;
            write_output(io, &content)
        }
        Command::Design { what } => {
            let cfg: DesignConfig = read_config(io)?;
            let design = cfg.design.unwrap_or_default();
            match what {
                DesignCmd::Lattice => {
                    let lattice = defect_lattice(&design)?;
                    write_output(io, &(lattice.to_json()? + "\n"))
                }
                DesignCmd::Scale { scaling } => {
                    let scaled = scale_design(&design, *scaling)?;
                    let json = serde_json::to_string_pretty(&scaled).map_err(Error::Json)?;
                    write_output(io, &(json + "\n"))
                }
                DesignCmd::BetaMap => {
                    let n = 200;
                    let ke_max = cfg.kappa_e_max.unwrap_or(200.0);
                    let ki_max = cfg.kappa_i_max.unwrap_or(60.0);
                    let ke: Vec<f64> =
                        (1..=n).map(|i| ke_max * i as f64 / n as f64).collect();
                    let ki: Vec<f64> =
                        (1..=n / 2).map(|i| ki_max * i as f64 / (n / 2) as f64).collect();
                    let levels_b = if cfg.beta_e_levels.is_empty() {
                        vec![0.3, 0.5, 0.6]
                    } else {
                        cfg.beta_e_levels.clone()
                    };
                    let levels_t = if cfg.tau_levels_ns.is_empty() {
                        vec![0.5, 2.0, 4.0]
                    } else {
                        cfg.tau_levels_ns.clone()
                    };
                    let map = external_beta_map(
                        &ke,
                        &ki,
                        cfg.g.unwrap_or(1.94),
                        cfg.gamma0.unwrap_or(0.0245),
                        cfg.tau0_ns.unwrap_or(6.5),
                        &levels_b,
                        &levels_t,
                    )?;
                    let json = serde_json::to_string_pretty(&map).map_err(Error::Json)?;
                    write_output(io, &(json + "\n"))
                }
                DesignCmd::DipSearch => {
                    let params = cfg.params.ok_or_else(|| {
                        Error::Config("dip-search needs 'params' in --config".into())
                    })?;
                    let dip = dip_search(
                        &params,
                        cfg.dce_lo.unwrap_or(0.5),
                        cfg.dce_hi.unwrap_or(40.0),
                    )?;
                    let json = serde_json::to_string_pretty(&dip).map_err(Error::Json)?;
                    write_output(io, &(json + "\n"))
                }
            }
        }
        Command::Stats => {
            let text = read_input(io)?;
            let records = manifest_from_json(&text)?;
            let stats = fleet_statistics(&records, None)?;
            let json = serde_json::to_string_pretty(&stats).map_err(Error::Json)?;
            write_output(io, &(json + "\n"))
        }
        Command::Report => {
            let inputs: ReportInputs = match &io.config {
                Some(_) => read_required_config(io)?,
                None => {
                    let text = read_input(io)?;
                    serde_json::from_str(&text).map_err(Error::Json)?
                }
            };
            let report = assemble_report(&inputs)?;
            write_output(io, &(report.to_json()? + "\n"))
        }
        Command::Classify => {
            let trace = read_trace(io)?;
            let c = classify_bright_dark(&trace, None)?;
            let json = serde_json::to_string_pretty(&c).map_err(Error::Json)?;
            write_output(io, &(json + "\n"))
        }
    }
}

fn num_complex_y(re: f64, im: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, im)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Numeric(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
