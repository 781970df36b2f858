//! Run configuration: TOML schema, defaults, and validation.
//!
//! Parsing and validation are separate stages with separate error classes.
//! A file that is not well-formed TOML for the schema below fails with
//! `Parse` (the message carries the offending line and field). A well-formed
//! file whose values break an invariant fails with `Validation`, and that
//! error lists every violation at once rather than stopping at the first.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tavis::SystemParams;

use crate::error::{CliError, Result};

/// Config file exactly as written, before defaults. Field-level options stay
/// `None` when absent so the validator can report them by name; the same
/// struct serializes back to TOML for round-trip checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    pub params: RawParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<RawPulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<RawInitial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cavity_photons: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPulse {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_pulse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ket: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Model,
    Transfer,
    Decompose,
    Response,
    AnalyticState,
    Master,
    Multiphoton,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Model,
        Command::Transfer,
        Command::Decompose,
        Command::Response,
        Command::AnalyticState,
        Command::Master,
        Command::Multiphoton,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Model => "model",
            Command::Transfer => "transfer",
            Command::Decompose => "decompose",
            Command::Response => "response",
            Command::AnalyticState => "analytic-state",
            Command::Master => "master",
            Command::Multiphoton => "multiphoton",
        }
    }

    fn parse(s: &str) -> Option<Command> {
        Command::ALL.iter().copied().find(|c| c.name() == s)
    }

    fn uses_pulse(self) -> bool {
        matches!(self, Command::Response | Command::Master)
    }

    fn requires_pulse(self) -> bool {
        matches!(self, Command::Response)
    }

    fn requires_ket(self) -> bool {
        matches!(self, Command::AnalyticState | Command::Master | Command::Multiphoton)
    }

    fn uses_time_grid(self) -> bool {
        matches!(
            self,
            Command::Response | Command::AnalyticState | Command::Master | Command::Multiphoton
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseSpec {
    RisingExp { gamma: f64 },
    Gaussian { omega_pulse: f64, t_p: f64 },
}

/// Grid after defaults. Entries a command does not read are filled with the
/// documented defaults where computable and 0 otherwise; only the fields the
/// command consumes are validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedGrid {
    pub dt: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub d_omega: f64,
}

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub out_dir: PathBuf,
    pub params: SystemParams,
    /// Cavity truncation R. Defaults to the ket excitation count plus one
    /// when a pulse can add a photon, or 1 when no ket is involved.
    pub max_cavity_photons: usize,
    pub pulse: Option<PulseSpec>,
    pub grid: ResolvedGrid,
    pub ket: Option<String>,
}

/// Command-line overrides applied on top of the file before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<(Vec<u8>, RunConfig)> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let raw = parse_config(text)?;
    let run = resolve(&raw, overrides)?;
    Ok((bytes, run))
}

fn check_finite(bad: &mut Vec<String>, name: &str, v: f64) -> bool {
    if v.is_finite() {
        true
    } else {
        bad.push(format!("{name}: must be finite, got {v}"));
        false
    }
}

/// Applies overrides and defaults, collecting every violated invariant.
pub fn resolve(raw: &RawConfig, overrides: &Overrides) -> Result<RunConfig> {
    let mut bad: Vec<String> = Vec::new();

    let command = Command::parse(&raw.command);
    if command.is_none() {
        let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
        bad.push(format!(
            "command: unknown value '{}' (expected one of {})",
            raw.command,
            names.join(", ")
        ));
    }

    // [params]: every field is reported by name when missing or malformed.
    let p = &raw.params;
    let n_atoms = match p.n_atoms {
        Some(n) => Some(n as usize),
        None => {
            bad.push("params.n_atoms: missing".into());
            None
        }
    };
    let omega_r = match p.omega_r {
        Some(w) if check_finite(&mut bad, "params.omega_r", w) => Some(w),
        Some(_) => None,
        None => {
            bad.push("params.omega_r: missing".into());
            None
        }
    };
    let vec_field = |bad: &mut Vec<String>, name: &str, v: &Option<Vec<f64>>| match v {
        Some(xs) => {
            let mut ok = true;
            if let Some(n) = n_atoms {
                if xs.len() != n {
                    bad.push(format!(
                        "params.{name}: has {} entries, expected n_atoms = {n}",
                        xs.len()
                    ));
                    ok = false;
                }
            }
            for (i, x) in xs.iter().enumerate() {
                if !x.is_finite() {
                    bad.push(format!("params.{name}[{i}]: must be finite, got {x}"));
                    ok = false;
                }
            }
            ok.then(|| xs.clone())
        }
        None => {
            bad.push(format!("params.{name}: missing"));
            None
        }
    };
    let omega = vec_field(&mut bad, "omega", &p.omega);
    let gamma = vec_field(&mut bad, "gamma", &p.gamma);
    let kappa = match p.kappa {
        Some(k) if check_finite(&mut bad, "params.kappa", k) => {
            if k < 0.0 {
                bad.push(format!("params.kappa: must be ≥ 0, got {k}"));
                None
            } else {
                Some(k)
            }
        }
        Some(_) => None,
        None => {
            bad.push("params.kappa: missing".into());
            None
        }
    };

    let params = match (n_atoms, omega_r, &omega, &gamma, kappa) {
        (Some(n), Some(wr), Some(w), Some(g), Some(k)) => {
            match SystemParams::new(n, wr, w.clone(), g.clone(), k) {
                Ok(sp) => Some(sp),
                Err(e) => {
                    bad.push(format!("params: {e}"));
                    None
                }
            }
        }
        _ => None,
    };

    // [pulse]
    let pulse = match &raw.pulse {
        None => None,
        Some(rp) => match rp.kind.as_str() {
            "rising-exp" => {
                if rp.omega_pulse.is_some() {
                    bad.push("pulse.omega_pulse: not used by kind 'rising-exp'".into());
                }
                if rp.t_p.is_some() {
                    bad.push("pulse.t_p: not used by kind 'rising-exp'".into());
                }
                match rp.gamma {
                    Some(g) if g.is_finite() && g > 0.0 => Some(PulseSpec::RisingExp { gamma: g }),
                    Some(g) => {
                        bad.push(format!("pulse.gamma: must be a positive finite rate, got {g}"));
                        None
                    }
                    None => {
                        bad.push("pulse.gamma: required by kind 'rising-exp'".into());
                        None
                    }
                }
            }
            "gaussian" => {
                if rp.gamma.is_some() {
                    bad.push("pulse.gamma: not used by kind 'gaussian'".into());
                }
                let op = match rp.omega_pulse {
                    Some(o) if o.is_finite() && o > 0.0 => Some(o),
                    Some(o) => {
                        bad.push(format!(
                            "pulse.omega_pulse: must be a positive finite rate, got {o}"
                        ));
                        None
                    }
                    None => {
                        bad.push("pulse.omega_pulse: required by kind 'gaussian'".into());
                        None
                    }
                };
                let tp = match rp.t_p {
                    Some(t) if t.is_finite() => Some(t),
                    Some(t) => {
                        bad.push(format!("pulse.t_p: must be finite, got {t}"));
                        None
                    }
                    None => {
                        bad.push("pulse.t_p: required by kind 'gaussian'".into());
                        None
                    }
                };
                match (op, tp) {
                    (Some(omega_pulse), Some(t_p)) => {
                        Some(PulseSpec::Gaussian { omega_pulse, t_p })
                    }
                    _ => None,
                }
            }
            other => {
                bad.push(format!(
                    "pulse.kind: unknown value '{other}' (expected 'rising-exp' or 'gaussian')"
                ));
                None
            }
        },
    };

    // Command / section compatibility.
    if let Some(cmd) = command {
        if raw.pulse.is_some() && !cmd.uses_pulse() {
            bad.push(format!("pulse: not used by command '{}'", cmd.name()));
        }
        if raw.pulse.is_none() && cmd.requires_pulse() {
            bad.push(format!("pulse: required by command '{}'", cmd.name()));
        }
        let has_ket = raw.initial.as_ref().and_then(|i| i.ket.as_ref()).is_some();
        if cmd.requires_ket() && !has_ket {
            bad.push(format!("initial.ket: required by command '{}'", cmd.name()));
        }
        if raw.initial.is_some() && !cmd.requires_ket() {
            bad.push(format!("initial: not used by command '{}'", cmd.name()));
        }
    }

    // Initial ket: length n_atoms + 1, atoms in {e, g}, one trailing cavity
    // digit that must fit under the resolved truncation.
    let ket = raw.initial.as_ref().and_then(|i| i.ket.clone());
    let mut ket_excitation = None;
    if let (Some(s), Some(n)) = (&ket, n_atoms) {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != n + 1 {
            bad.push(format!(
                "initial.ket: '{s}' has {} symbols, expected n_atoms + 1 = {}",
                chars.len(),
                n + 1
            ));
        } else {
            let mut excitation = 0usize;
            let mut ok = true;
            for (i, &c) in chars[..n].iter().enumerate() {
                match c {
                    'e' => excitation += 1,
                    'g' => {}
                    _ => {
                        bad.push(format!(
                            "initial.ket: atom symbol {} is '{c}', expected 'e' or 'g'",
                            i + 1
                        ));
                        ok = false;
                    }
                }
            }
            match chars[n].to_digit(10) {
                Some(d) => excitation += d as usize,
                None => {
                    bad.push(format!(
                        "initial.ket: cavity symbol '{}' is not a digit",
                        chars[n]
                    ));
                    ok = false;
                }
            }
            if ok {
                ket_excitation = Some(excitation);
            }
        }
    }

    // Truncation default: enough room for the ket plus one drive photon.
    // Commands without a ket never climb the ladder, so one level suffices.
    let max_cavity_photons = match p.max_cavity_photons {
        Some(r) => r as usize,
        None => ket_excitation
            .map(|e| e + usize::from(pulse.is_some()))
            .unwrap_or(1),
    };
    if let Some(s) = &ket {
        if let Some(d) = s.chars().last().and_then(|c| c.to_digit(10)) {
            if d as usize > max_cavity_photons {
                bad.push(format!(
                    "initial.ket: cavity symbol {d} exceeds max_cavity_photons = {max_cavity_photons}"
                ));
            }
        }
    }
    if command == Some(Command::Multiphoton) && ket_excitation == Some(0) {
        bad.push(
            "initial.ket: command 'multiphoton' requires at least one excitation".into(),
        );
    }
    if command == Some(Command::AnalyticState) {
        if let (Some(s), Some(n)) = (&ket, n_atoms) {
            let excited = s.chars().take(n).filter(|&c| c == 'e').count();
            let digit = s.chars().last().and_then(|c| c.to_digit(10));
            if excited != 1 || digit != Some(0) {
                bad.push(
                    "initial.ket: command 'analytic-state' requires exactly one excited atom \
                     and an empty cavity (e.g. \"geg0\")"
                        .into(),
                );
            }
        }
    }

    // [grid] with command-line overrides taking precedence, then defaults.
    let rg = raw.grid.clone().unwrap_or(RawGrid {
        dt: None,
        t_min: None,
        t_max: None,
        omega_min: None,
        omega_max: None,
        d_omega: None,
    });
    let dt_given = overrides.dt.or(rg.dt);
    let t_max_given = overrides.t_max.or(rg.t_max);
    for (name, v) in [
        ("grid.dt", dt_given),
        ("grid.t_min", rg.t_min),
        ("grid.t_max", t_max_given),
        ("grid.omega_min", rg.omega_min),
        ("grid.omega_max", rg.omega_max),
        ("grid.d_omega", rg.d_omega),
    ] {
        if let Some(v) = v {
            check_finite(&mut bad, name, v);
        }
    }
    for (name, v) in [("grid.dt", dt_given), ("grid.d_omega", rg.d_omega)] {
        if let Some(v) = v {
            if v.is_finite() && v <= 0.0 {
                bad.push(format!("{name}: must be positive, got {v}"));
            }
        }
    }

    let kappa_pos = kappa.filter(|&k| k > 0.0);
    let needs_time = command.map(Command::uses_time_grid).unwrap_or(false);
    let dt = match (dt_given, kappa_pos) {
        (Some(v), _) => v,
        (None, Some(k)) => 0.005 / k,
        (None, None) => {
            if needs_time {
                bad.push("grid.dt: required when kappa = 0 (no default step)".into());
            }
            0.0
        }
    };
    let t_max = match (t_max_given, kappa_pos) {
        (Some(v), _) => v,
        (None, Some(k)) => 50.0 / k,
        (None, None) => {
            if needs_time {
                bad.push("grid.t_max: required when kappa = 0 (no default horizon)".into());
            }
            0.0
        }
    };
    let t_min = match rg.t_min {
        Some(v) => v,
        None => match (command, pulse) {
            (Some(Command::Response), Some(PulseSpec::RisingExp { gamma })) => -30.0 / gamma,
            (Some(Command::Response), Some(PulseSpec::Gaussian { omega_pulse, t_p })) => {
                t_p - 6.0 / omega_pulse
            }
            _ => 0.0,
        },
    };
    if needs_time && t_max <= t_min {
        bad.push(format!(
            "grid.t_max: horizon {t_max} does not exceed grid.t_min = {t_min}"
        ));
    }

    // Frequency window default: ±5·√N·Γ̄ covers both Rabi peaks with margin;
    // fall back to the linewidth scale when the collective coupling is zero.
    let omega_scale = params
        .as_ref()
        .map(|sp| {
            let s = 5.0 * sp.total_coupling();
            if s > 0.0 {
                s
            } else if sp.kappa > 0.0 {
                5.0 * sp.kappa
            } else {
                5.0
            }
        })
        .unwrap_or(5.0);
    let omega_min = rg.omega_min.unwrap_or(-omega_scale);
    let omega_max = rg.omega_max.unwrap_or(omega_scale);
    let d_omega = rg.d_omega.unwrap_or(1e-3);
    if command == Some(Command::Transfer) && omega_max <= omega_min {
        bad.push(format!(
            "grid.omega_max: window end {omega_max} does not exceed grid.omega_min = {omega_min}"
        ));
    }

    let out_dir = overrides
        .out
        .clone()
        .or_else(|| raw.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    if !bad.is_empty() {
        return Err(CliError::Validation(bad));
    }
    Ok(RunConfig {
        command: command.expect("validated"),
        out_dir,
        params: params.expect("validated"),
        max_cavity_photons,
        pulse,
        grid: ResolvedGrid { dt, t_min, t_max, omega_min, omega_max, d_omega },
        ket,
    })
}
