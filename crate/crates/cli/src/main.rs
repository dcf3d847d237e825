use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orthocal::calibration::report::{CalibrationReport, ValidationDocument};
use orthocal::measurement::io::{parse_session, write_session, GeometryRecord};
use orthocal::{
    identify_offsets, session_to_deviations, simulate_session, validate, DeviationForm, Error,
    JointOffsets, NoiseModel,
};
use serde::Deserialize;

/// Joint-offset calibration for Orthoglide-type parallel manipulators.
#[derive(Parser, Debug)]
#[command(name = "orthocal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a gauge session for known joint offsets.
    Simulate {
        /// Geometry config (TOML or JSON).
        #[arg(long)]
        geometry: PathBuf,
        /// True offsets in mm as `dx,dy,dz`.
        #[arg(long, value_parser = parse_offsets, allow_hyphen_values = true, default_value = "0,0,0")]
        offsets: JointOffsets<f64>,
        /// Repeats per posture (overrides the config).
        #[arg(long)]
        repeats: Option<u32>,
        /// Noise seed; required whenever noise is enabled.
        #[arg(long)]
        seed: Option<u64>,
        /// Gauge noise standard deviation in mm; enables noise.
        #[arg(long)]
        sigma: Option<f64>,
        /// Gauge resolution in mm (0 disables quantisation).
        #[arg(long)]
        resolution: Option<f64>,
        /// Disable noise even if the config defines it.
        #[arg(long, conflicts_with_all = ["sigma", "resolution"])]
        noiseless: bool,
        /// Form of the echoed noiseless deviation vector.
        #[arg(long)]
        form: Option<DeviationForm>,
        /// Output session file (`.csv` or `.json`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Identify joint offsets from a session.
    Calibrate {
        session: PathBuf,
        #[arg(long, default_value = "reduced6")]
        form: DeviationForm,
        /// Geometry config overriding the one stored in the session.
        #[arg(long)]
        geometry: Option<PathBuf>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a post-compensation session with a report's prediction.
    Validate {
        #[arg(long)]
        report: PathBuf,
        session: PathBuf,
        /// Write the JSON comparison here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_offsets(s: &str) -> std::result::Result<JointOffsets<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected dx,dy,dz, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|e| format!("offset {p:?}: {e}"))?;
    }
    Ok(JointOffsets::new(v[0], v[1], v[2]))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseConfig {
    sigma_mm: Option<f64>,
    resolution_mm: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    units: Option<String>,
    #[serde(rename = "L_mm")]
    leg_length_mm: f64,
    alpha_max_rad: f64,
    alpha_min_rad: f64,
    repeats: Option<u32>,
    form: Option<DeviationForm>,
    noise: Option<NoiseConfig>,
}

/// An error plus the file it concerns, when that is not already in the message.
struct Failure {
    error: Error,
    file: Option<PathBuf>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, file: None }
    }
}

fn in_file(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |error| {
        let file = (!matches!(error, Error::Io(_))).then(|| path.to_path_buf());
        Failure { error, file }
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn load_config(path: &Path) -> Result<Config, Error> {
    let text = read_text(path)?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let cfg: Config = if is_json {
        serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?
    } else {
        toml::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("config: {}", e.message().trim())))?
    };
    if let Some(u) = &cfg.units {
        if u != "mm" {
            return Err(Error::Unit(u.clone()));
        }
    }
    Ok(cfg)
}

fn config_geometry(cfg: &Config) -> Result<orthocal::Geometry<f64>, Error> {
    GeometryRecord {
        leg_length_mm: cfg.leg_length_mm,
        alpha_max_rad: cfg.alpha_max_rad,
        alpha_min_rad: cfg.alpha_min_rad,
    }
    .to_geometry()
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        "config" | "kinematics" => 2,
        "schema" | "form-mismatch" | "empty-input" => 3,
        "incomplete-session" => 4,
        "degenerate-geometry" => 5,
        "io" => 6,
        _ => 1,
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    geometry: &Path,
    offsets: JointOffsets<f64>,
    repeats: Option<u32>,
    seed: Option<u64>,
    sigma: Option<f64>,
    resolution: Option<f64>,
    noiseless: bool,
    form: Option<DeviationForm>,
    out: &Path,
) -> Result<String, Failure> {
    let cfg = load_config(geometry).map_err(in_file(geometry))?;
    let g = config_geometry(&cfg).map_err(in_file(geometry))?;
    let repeats = repeats.or(cfg.repeats).unwrap_or(3);
    let form = form.or(cfg.form).unwrap_or(DeviationForm::Reduced6);

    let noise = if noiseless {
        None
    } else {
        let from_cfg = cfg.noise.as_ref();
        let enabled = sigma.is_some() || resolution.is_some() || from_cfg.is_some();
        if enabled {
            let seed = seed.or(from_cfg.and_then(|n| n.seed)).ok_or_else(|| {
                Error::InvalidArgument("noise is enabled but no seed was given (use --seed)".into())
            })?;
            let defaults = NoiseModel::<f64>::gauge_default(seed);
            Some(NoiseModel {
                sigma: sigma
                    .or(from_cfg.and_then(|n| n.sigma_mm))
                    .unwrap_or(defaults.sigma),
                resolution: resolution
                    .or(from_cfg.and_then(|n| n.resolution_mm))
                    .unwrap_or(defaults.resolution),
                seed,
            })
        } else {
            None
        }
    };

    let session = simulate_session(&g, &offsets, repeats, noise)?;
    write_session(&session, out).map_err(in_file(out))?;

    let clean = session_to_deviations(&simulate_session(&g, &offsets, 1, None)?, form)?;
    let mut text = format!(
        "wrote {} readings ({} repeats, {}) to {}\n",
        session.readings.len(),
        repeats,
        match noise {
            Some(n) => format!(
                "noise sigma {} mm, resolution {} mm, seed {}",
                n.sigma, n.resolution, n.seed
            ),
            None => "noiseless".to_string(),
        },
        out.display()
    );
    text.push_str(&format!("noiseless deviations ({form}) [mm]:\n"));
    for (label, v) in clean.labels().iter().zip(&clean.values) {
        text.push_str(&format!("  {:<8} {:>+10.4}\n", label, v));
    }
    Ok(text)
}

fn calibrate(
    session: &Path,
    form: DeviationForm,
    geometry: Option<&Path>,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let s = parse_session(session).map_err(in_file(session))?;
    let g = match geometry {
        Some(p) => load_config(p)
            .and_then(|c| config_geometry(&c))
            .map_err(in_file(p))?,
        None => s.geometry,
    };
    let d = session_to_deviations(&s, form).map_err(in_file(session))?;
    let res = identify_offsets(&d, &g)?;
    let report = CalibrationReport::new(&d, &res)?;
    if let Some(p) = out {
        write_text(p, &report.to_json()?)?;
    }
    Ok(format!("{report}\n"))
}

fn validate_cmd(report: &Path, session: &Path, out: Option<&Path>) -> Result<String, Failure> {
    let rep = read_text(report)
        .and_then(|t| CalibrationReport::from_json(&t))
        .map_err(in_file(report))?;
    let predicted = rep.predicted().map_err(in_file(report))?;
    let s = parse_session(session).map_err(in_file(session))?;
    let measured = session_to_deviations(&s, rep.form).map_err(in_file(session))?;
    let v = validate(&measured, &predicted)?;
    let doc = ValidationDocument::new(&v, rep.rms_before_mm);
    if let Some(p) = out {
        write_text(p, &doc.to_json()?)?;
    }
    Ok(format!("{}\n", doc.render()))
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Simulate {
            geometry,
            offsets,
            repeats,
            seed,
            sigma,
            resolution,
            noiseless,
            form,
            out,
        } => simulate(
            &geometry, offsets, repeats, seed, sigma, resolution, noiseless, form, &out,
        ),
        Command::Calibrate {
            session,
            form,
            geometry,
            out,
        } => calibrate(&session, form, geometry.as_deref(), out.as_deref()),
        Command::Validate {
            report,
            session,
            out,
        } => validate_cmd(&report, &session, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // Keep clap's message and detail lines, drop the usage block.
            let detail = e.to_string();
            let msg = detail
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("error[config]: {}", msg.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure { error, file }) => {
            let msg = error.to_string().replace('\n', " ");
            match file {
                Some(f) => eprintln!("error[{}]: {}: {msg}", error.class(), f.display()),
                None => eprintln!("error[{}]: {msg}", error.class()),
            }
            ExitCode::from(exit_code(&error))
        }
    }
}
