//! Command line front end for the four-photon entanglement analysis:
//! state construction, outcome statistics, correlation tensors with the
//! l1 locality criterion, Bell-expression evaluation, phase optimization,
//! and CSV scans for plotting.

mod output;
mod phases;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::f64::consts::TAU;
use std::path::PathBuf;

use fourfold::{
    double_pair_pipeline, lhv_bound, quantum_tensor, quantum_value, optimize_settings,
    BellExpression, CorrelationSource, CorrelationTensor, CreationPolynomial, NoiseMixture,
    OptimizeConfig, Outcome, PhaseSettings, SettingChoices, TensorReport,
};
use output::{fmt_complex, sig12};

#[derive(Parser)]
#[command(
    name = "fourfold",
    version,
    about = "Four-photon entanglement statistics, locality analysis, and violation search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; csv suits tabular commands, json the report commands.
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,

    /// Write the output to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage {
    /// Double-pair emission term, before the beam splitters.
    Pairterm,
    /// After both beam splitters.
    Split,
    /// Fourfold-coincidence part only.
    Postselected,
    /// Coincidence part with the a-side polarizations rotated.
    Rotated,
    /// The normalized sixteen-amplitude polarization state.
    Final,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VaryBeam {
    A,
    APrime,
    B,
    BPrime,
}

/// One analyzer phase per beam, as positional arguments.
#[derive(Args, Clone, Copy)]
struct PointArgs {
    /// Phase for beam a (radians; accepts pi literals like "pi/4").
    #[arg(value_parser = phases::parse_phase, allow_hyphen_values = true)]
    phi_a: f64,
    /// Phase for beam a'.
    #[arg(value_parser = phases::parse_phase, allow_hyphen_values = true)]
    phi_a_prime: f64,
    /// Phase for beam b.
    #[arg(value_parser = phases::parse_phase, allow_hyphen_values = true)]
    phi_b: f64,
    /// Phase for beam b'.
    #[arg(value_parser = phases::parse_phase, allow_hyphen_values = true)]
    phi_b_prime: f64,
}

impl PointArgs {
    fn settings(self) -> PhaseSettings {
        PhaseSettings::new(self.phi_a, self.phi_a_prime, self.phi_b, self.phi_b_prime)
    }
}

/// Two candidate phases per beam; beams not given default to "0,0".
#[derive(Args, Clone, Copy)]
struct SettingArgs {
    /// Pair of phases for beam a, e.g. "0,pi/2".
    #[arg(long, value_parser = phases::parse_phase_pair, value_name = "P1,P2",
          allow_hyphen_values = true, conflicts_with = "standard_settings")]
    phi_a: Option<[f64; 2]>,
    /// Pair of phases for beam a'.
    #[arg(long, value_parser = phases::parse_phase_pair, value_name = "P1,P2",
          allow_hyphen_values = true, conflicts_with = "standard_settings")]
    phi_a_prime: Option<[f64; 2]>,
    /// Pair of phases for beam b.
    #[arg(long, value_parser = phases::parse_phase_pair, value_name = "P1,P2",
          allow_hyphen_values = true, conflicts_with = "standard_settings")]
    phi_b: Option<[f64; 2]>,
    /// Pair of phases for beam b'.
    #[arg(long, value_parser = phases::parse_phase_pair, value_name = "P1,P2",
          allow_hyphen_values = true, conflicts_with = "standard_settings")]
    phi_b_prime: Option<[f64; 2]>,
    /// Preset with the strongest violation: phi_a in {0, pi/2}, the other
    /// beams in {-pi/4, pi/4}.
    #[arg(long)]
    standard_settings: bool,
}

impl SettingArgs {
    fn resolve(self) -> SettingChoices {
        if self.standard_settings {
            SettingChoices::standard_violation()
        } else {
            SettingChoices {
                phi_a: self.phi_a.unwrap_or([0.0; 2]),
                phi_a_prime: self.phi_a_prime.unwrap_or([0.0; 2]),
                phi_b: self.phi_b.unwrap_or([0.0; 2]),
                phi_b_prime: self.phi_b_prime.unwrap_or([0.0; 2]),
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the post-selected four-photon state or an intermediate stage.
    State {
        #[arg(long, value_enum, default_value = "final")]
        stage: Stage,
    },
    /// The four-party correlation E at one phase setting.
    Correlate {
        #[command(flatten)]
        point: PointArgs,
        /// Pure-state weight in the noise mixture, in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
    },
    /// The sixteen outcome probabilities at one phase setting.
    Probs {
        #[command(flatten)]
        point: PointArgs,
        /// Pure-state weight in the noise mixture, in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
    },
    /// Correlation tensor over two settings per beam, its basis
    /// coefficients, the l1 norm, and the local-model verdict.
    Tensor {
        #[command(flatten)]
        settings: SettingArgs,
        /// Pure-state weight in the noise mixture, in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
    },
    /// Evaluate a Bell expression: enumerated local bound, quantum value,
    /// and their ratio.
    Bell {
        /// JSON file with a 2x2x2x2 nested array of weights.
        #[arg(long, value_name = "FILE")]
        expression: PathBuf,
        /// JSON file with a correlation tensor (a bare nested array or a
        /// report from `tensor --format json`); when absent the tensor is
        /// computed from the setting flags below.
        #[arg(long, value_name = "FILE",
              conflicts_with_all = ["phi_a", "phi_a_prime", "phi_b", "phi_b_prime",
                                    "standard_settings", "visibility"])]
        tensor: Option<PathBuf>,
        #[command(flatten)]
        settings: SettingArgs,
        /// Pure-state weight in the noise mixture, in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
    },
    /// Search all eight analyzer phases for the largest l1 norm.
    Optimize {
        /// Seed for the randomized refinement starts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid resolution per phase (8 covers every multiple of pi/4).
        #[arg(long, default_value_t = 8)]
        grid_steps: usize,
        /// Number of grid candidates and extra random starts to refine.
        #[arg(long, default_value_t = 4)]
        starts: usize,
        /// Simplex iteration budget per start.
        #[arg(long, default_value_t = 400)]
        max_iters: usize,
        /// Eight comma-separated starting phases
        /// (a1,a2,a'1,a'2,b1,b2,b'1,b'2); defaults to all zeros.
        #[arg(long, value_parser = phases::parse_phase_octet, value_name = "PHASES",
              allow_hyphen_values = true)]
        initial: Option<[f64; 8]>,
        /// Pure-state weight in the noise mixture, in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
    },
    /// Sweep one beam's phase over [0, 2pi) and emit E as CSV.
    Scan {
        #[command(flatten)]
        point: PointArgs,
        /// Which beam's phase to sweep (its positional value is ignored).
        #[arg(long, value_enum)]
        vary: VaryBeam,
        /// Number of sweep points.
        #[arg(long, default_value_t = 256)]
        points: usize,
        /// Pure-state weight in the noise mixture, in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|content| output::emit(cli.output.as_deref(), &content));
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: &Cli) -> anyhow::Result<String> {
    match &cli.command {
        Command::State { stage } => cmd_state(*stage, cli.format),
        Command::Correlate { point, visibility } => cmd_correlate(*point, *visibility, cli.format),
        Command::Probs { point, visibility } => cmd_probs(*point, *visibility, cli.format),
        Command::Tensor {
            settings,
            visibility,
        } => cmd_tensor(settings.resolve(), *visibility, cli.format),
        Command::Bell {
            expression,
            tensor,
            settings,
            visibility,
        } => cmd_bell(
            expression,
            tensor.as_deref(),
            settings.resolve(),
            *visibility,
            cli.format,
        ),
        Command::Optimize {
            seed,
            grid_steps,
            starts,
            max_iters,
            initial,
            visibility,
        } => cmd_optimize(
            OptimizeConfig {
                grid_steps: *grid_steps,
                refine_starts: *starts,
                max_iterations: *max_iters,
                seed: *seed,
                ..OptimizeConfig::default()
            },
            initial.map(SettingChoices::from_flat).unwrap_or_default(),
            *visibility,
            cli.format,
        ),
        Command::Scan {
            point,
            vary,
            points,
            visibility,
        } => cmd_scan(*point, *vary, *points, *visibility, cli.format),
    }
}

fn pipeline_mixture(visibility: f64) -> anyhow::Result<NoiseMixture> {
    NoiseMixture::new(double_pair_pipeline().state, visibility)
        .context("visibility must lie in [0, 1]")
}

fn csv_unavailable(command: &str) -> anyhow::Error {
    anyhow::anyhow!("csv output is not available for the {command} command")
}

fn cmd_state(stage: Stage, format: Format) -> anyhow::Result<String> {
    let stages = double_pair_pipeline();
    if stage == Stage::Final {
        let amplitudes = stages.state.amplitude_map();
        return Ok(match format {
            Format::Human => {
                let mut out = String::from("pattern  amplitude\n");
                for (pattern, [re, im]) in &amplitudes {
                    out += &format!("{pattern}     {}\n", fmt_complex(*re, *im));
                }
                out
            }
            Format::Json => {
                let mut value = serde_json::json!({
                    "stage": "final",
                    "amplitudes": amplitudes,
                });
                output::round_json(&mut value);
                output::to_json_string(&value)
            }
            Format::Csv => {
                let mut out = String::from("pattern,re,im\n");
                for (pattern, [re, im]) in &amplitudes {
                    out += &format!("{pattern},{},{}\n", sig12(*re), sig12(*im));
                }
                out
            }
        });
    }

    let polynomial: &CreationPolynomial = match stage {
        Stage::Pairterm => &stages.pair_term,
        Stage::Split => &stages.split,
        Stage::Postselected => &stages.postselected,
        Stage::Rotated => &stages.rotated,
        Stage::Final => unreachable!(),
    };
    let name = match stage {
        Stage::Pairterm => "pairterm",
        Stage::Split => "split",
        Stage::Postselected => "postselected",
        Stage::Rotated => "rotated",
        Stage::Final => unreachable!(),
    };
    Ok(match format {
        Format::Human => {
            let mut out = String::from("coefficient  term\n");
            for (monomial, coefficient) in polynomial.terms() {
                out += &format!(
                    "{}  {monomial}\n",
                    fmt_complex(coefficient.re, coefficient.im)
                );
            }
            out
        }
        Format::Json => {
            let mut terms = serde_json::Map::new();
            for (monomial, coefficient) in polynomial.terms() {
                terms.insert(
                    monomial.to_string(),
                    serde_json::json!([coefficient.re, coefficient.im]),
                );
            }
            let mut value = serde_json::json!({ "stage": name, "terms": terms });
            output::round_json(&mut value);
            output::to_json_string(&value)
        }
        Format::Csv => {
            let mut out = String::from("term,re,im\n");
            for (monomial, coefficient) in polynomial.terms() {
                out += &format!(
                    "{monomial},{},{}\n",
                    sig12(coefficient.re),
                    sig12(coefficient.im)
                );
            }
            out
        }
    })
}

fn correlation_csv_row(settings: PhaseSettings, e: f64) -> String {
    format!(
        "{},{},{},{},{}\n",
        sig12(settings.phi_a),
        sig12(settings.phi_a_prime),
        sig12(settings.phi_b),
        sig12(settings.phi_b_prime),
        sig12(e)
    )
}

const CORRELATION_CSV_HEADER: &str = "phi_a,phi_a',phi_b,phi_b',E\n";

fn cmd_correlate(point: PointArgs, visibility: f64, format: Format) -> anyhow::Result<String> {
    let settings = point.settings();
    let e = pipeline_mixture(visibility)?.correlation(settings);
    Ok(match format {
        Format::Human => format!("E = {}\n", sig12(e)),
        Format::Json => {
            let mut value = serde_json::json!({
                "phi_a": settings.phi_a,
                "phi_a'": settings.phi_a_prime,
                "phi_b": settings.phi_b,
                "phi_b'": settings.phi_b_prime,
                "visibility": visibility,
                "E": e,
            });
            output::round_json(&mut value);
            output::to_json_string(&value)
        }
        Format::Csv => format!("{CORRELATION_CSV_HEADER}{}", correlation_csv_row(settings, e)),
    })
}

fn cmd_probs(point: PointArgs, visibility: f64, format: Format) -> anyhow::Result<String> {
    let settings = point.settings();
    let mixture = pipeline_mixture(visibility)?;
    let table: Vec<(String, f64)> = Outcome::all()
        .iter()
        .map(|&o| (o.label(), mixture.probability(o, settings)))
        .collect();
    Ok(match format {
        Format::Human => {
            let mut out = String::from("outcome  probability\n");
            let mut total = 0.0;
            for (label, p) in &table {
                out += &format!("{label}     {}\n", sig12(*p));
                total += p;
            }
            out += &format!("total    {}\n", sig12(total));
            out
        }
        Format::Json => {
            let mut probabilities = serde_json::Map::new();
            for (label, p) in &table {
                probabilities.insert(label.clone(), serde_json::json!(p));
            }
            let mut value = serde_json::json!({
                "phi_a": settings.phi_a,
                "phi_a'": settings.phi_a_prime,
                "phi_b": settings.phi_b,
                "phi_b'": settings.phi_b_prime,
                "visibility": visibility,
                "probabilities": probabilities,
            });
            output::round_json(&mut value);
            output::to_json_string(&value)
        }
        Format::Csv => {
            let mut out = String::from("outcome,probability\n");
            for (label, p) in &table {
                out += &format!("{label},{}\n", sig12(*p));
            }
            out
        }
    })
}

fn render_settings(settings: &SettingChoices) -> String {
    let beams = [
        ("phi_a ", settings.phi_a),
        ("phi_a'", settings.phi_a_prime),
        ("phi_b ", settings.phi_b),
        ("phi_b'", settings.phi_b_prime),
    ];
    let mut out = String::from("settings (choice 1, choice 2):\n");
    for (label, pair) in beams {
        out += &format!("  {label}  {}  {}\n", sig12(pair[0]), sig12(pair[1]));
    }
    out
}

fn render_indexed_block(
    title: &str,
    entries: impl Iterator<Item = ([usize; 4], f64)>,
) -> String {
    let mut out = format!("{title}\n");
    for (idx, value) in entries {
        let digits: String = idx.iter().map(|i| char::from(b'1' + *i as u8)).collect();
        out += &format!("  {digits}  {}\n", sig12(value));
    }
    out
}

fn cmd_tensor(
    settings: SettingChoices,
    visibility: f64,
    format: Format,
) -> anyhow::Result<String> {
    let mixture = pipeline_mixture(visibility)?;
    let report = TensorReport::evaluate(&mixture, settings);
    Ok(match format {
        Format::Human => {
            let mut out = render_settings(&report.settings);
            out += &render_indexed_block("correlation tensor E (setting choices):", report.tensor.iter());
            out += &render_indexed_block("basis coefficients c (vector indices):", report.coefficients.iter());
            out += &format!("l1 = {}\n", sig12(report.l1));
            out += &format!("critical visibility = {}\n", sig12(report.critical_visibility));
            out += if report.admits_lhv() {
                "local model: YES (l1 <= 1)\n"
            } else {
                "local model: NO (l1 > 1)\n"
            };
            out
        }
        Format::Json => {
            let mut value = serde_json::to_value(&report).context("serializing tensor report")?;
            output::round_json(&mut value);
            output::to_json_string(&value)
        }
        Format::Csv => return Err(csv_unavailable("tensor")),
    })
}

fn read_tensor_file(path: &std::path::Path) -> anyhow::Result<CorrelationTensor> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading tensor file {}", path.display()))?;
    if let Ok(report) = serde_json::from_str::<TensorReport>(&text) {
        return Ok(report.tensor);
    }
    serde_json::from_str::<CorrelationTensor>(&text).with_context(|| {
        format!(
            "{} holds neither a tensor report nor a 2x2x2x2 array",
            path.display()
        )
    })
}

fn cmd_bell(
    expression_path: &std::path::Path,
    tensor_path: Option<&std::path::Path>,
    settings: SettingChoices,
    visibility: f64,
    format: Format,
) -> anyhow::Result<String> {
    let text = std::fs::read_to_string(expression_path)
        .with_context(|| format!("reading expression file {}", expression_path.display()))?;
    let expression: BellExpression = serde_json::from_str(&text)
        .with_context(|| format!("parsing Bell expression from {}", expression_path.display()))?;
    let tensor = match tensor_path {
        Some(path) => read_tensor_file(path)?,
        None => quantum_tensor(&pipeline_mixture(visibility)?, &settings),
    };
    let bound = lhv_bound(&expression);
    let value = quantum_value(&expression, &tensor);
    let ratio = (bound > 0.0).then(|| value.abs() / bound);
    Ok(match format {
        Format::Human => {
            let mut out = format!("local bound = {}\n", sig12(bound));
            out += &format!("quantum value = {}\n", sig12(value));
            out += &match ratio {
                Some(r) => format!("violation ratio = {}\n", sig12(r)),
                None => "violation ratio = n/a (zero local bound)\n".to_string(),
            };
            out
        }
        Format::Json => {
            let mut value = serde_json::json!({
                "lhv_bound": bound,
                "quantum_value": value,
                "violation_ratio": ratio,
            });
            output::round_json(&mut value);
            output::to_json_string(&value)
        }
        Format::Csv => return Err(csv_unavailable("bell")),
    })
}

fn cmd_optimize(
    config: OptimizeConfig,
    initial: SettingChoices,
    visibility: f64,
    format: Format,
) -> anyhow::Result<String> {
    let mixture = pipeline_mixture(visibility)?;
    let outcome = optimize_settings(&mixture, initial, &config)?;
    Ok(match format {
        Format::Human => {
            let mut out = render_settings(&outcome.settings);
            out += &format!("l1 = {}\n", sig12(outcome.l1));
            out += &format!(
                "critical visibility = {}\n",
                sig12(outcome.critical_visibility)
            );
            out += &format!("iterations = {}\n", outcome.iterations);
            out
        }
        Format::Json => {
            let mut value = serde_json::to_value(&outcome).context("serializing outcome")?;
            output::round_json(&mut value);
            output::to_json_string(&value)
        }
        Format::Csv => return Err(csv_unavailable("optimize")),
    })
}

fn cmd_scan(
    point: PointArgs,
    vary: VaryBeam,
    points: usize,
    visibility: f64,
    format: Format,
) -> anyhow::Result<String> {
    if points == 0 {
        bail!("--points must be at least 1");
    }
    if format == Format::Json {
        bail!("scan emits csv; use --format csv (or human)");
    }
    let mixture = pipeline_mixture(visibility)?;
    let base = point.settings();
    let mut out = String::from(CORRELATION_CSV_HEADER);
    for i in 0..points {
        let phase = TAU * i as f64 / points as f64;
        let mut settings = base;
        match vary {
            VaryBeam::A => settings.phi_a = phase,
            VaryBeam::APrime => settings.phi_a_prime = phase,
            VaryBeam::B => settings.phi_b = phase,
            VaryBeam::BPrime => settings.phi_b_prime = phase,
        }
        out += &correlation_csv_row(settings, mixture.correlation(settings));
    }
    Ok(out)
}
