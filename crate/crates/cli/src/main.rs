mod args;
mod report;

use std::f64::consts::{PI, TAU};
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use coupler::characterize::{
    critical_photon_number, extract_from_energy, extract_from_phase, search_window, sweep_vs_boundary,
};
use coupler::numerics::linspace;
use coupler::spectroscopy::compute_spectrum;
use coupler::squid::{flux_for_omega3, omega3};
use coupler::{Boundary, CouplerError, Device, DeviceConfig};

use args::{BiasArgs, Cli, Command, DeviceOverrides, Format};
use report::{Cell, Report};

const GHZ: f64 = 1e9;

enum Failure {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<CouplerError> for Failure {
    fn from(e: CouplerError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn invalid(field: &'static str, requirement: &'static str, value: f64) -> Failure {
    CouplerError::Invalid { field, requirement, value }.into()
}

fn resolve_config(cli: &Cli) -> Outcome<DeviceConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Validation(format!("invalid config {}: {e}", path.display())))?
        }
        None => DeviceConfig::default(),
    };
    let DeviceOverrides { v_m_per_s, impedance_ohm, l2_mm, l3_mm, cs_ff, ic_ua } = cli.device;
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.v_m_per_s, v_m_per_s);
    set(&mut cfg.impedance_ohm, impedance_ohm);
    set(&mut cfg.l2_mm, l2_mm);
    set(&mut cfg.l3_mm, l3_mm);
    set(&mut cfg.cs_ff, cs_ff);
    set(&mut cfg.ic_ua, ic_ua);
    Ok(cfg)
}

fn resolve_bias(dev: &Device, bias: &BiasArgs) -> Outcome<Boundary> {
    let bc = match (bias.phiex, bias.flux, bias.omega3_ghz) {
        (Some(phi), None, None) => Boundary::try_new(phi)?,
        (None, Some(flux), None) => Boundary::from_flux_quanta(flux)?,
        (None, None, Some(f3)) => {
            if !(f3.is_finite() && f3 > 0.0) {
                return Err(invalid("omega3_ghz", "positive", f3));
            }
            flux_for_omega3(dev, TAU * f3 * GHZ)?
        }
        _ => return Err(Failure::Validation("exactly one of --phiex, --flux, --omega3-ghz is required".into())),
    };
    Ok(bc)
}

fn bias_params(report: &mut Report, dev: &Device, bc: &Boundary) -> Outcome<()> {
    report
        .param("phi_ex_rad", bc.phi_ex())
        .param("flux_over_flux_quantum", bc.flux_over_flux_quantum())
        .param("omega3_ghz", omega3(dev, bc)? / TAU / GHZ)
        .param("omega2_ghz", dev.omega2() / TAU / GHZ);
    Ok(())
}

fn check_grid(points: usize, min_points: usize, lo: f64, hi: f64, what: &'static str) -> Outcome<()> {
    if points < min_points {
        return Err(Failure::Validation(format!("points must be at least {min_points} (got {points})")));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Failure::Validation(format!("{what} range must be finite and increasing (got {lo} .. {hi})")));
    }
    Ok(())
}

fn params(cfg: DeviceConfig, dev: &Device) -> Outcome<Report> {
    let mut r = Report::new("params", cfg, &["quantity", "value", "unit", "si_value", "si_unit"]);
    let h = TAU * coupler::PhysicalConstants::REDUCED_PLANCK;
    let f3_max = omega3(dev, &Boundary::new(0.0))?;
    let f3_min = omega3(dev, &Boundary::new(PI))?;
    let rows: [(&str, f64, &str, f64, &str); 12] = [
        ("v", cfg.v_m_per_s, "m/s", dev.velocity(), "m/s"),
        ("impedance", cfg.impedance_ohm, "ohm", dev.impedance(), "ohm"),
        ("l2", cfg.l2_mm, "mm", dev.l2(), "m"),
        ("l3", cfg.l3_mm, "mm", dev.l3(), "m"),
        ("cs", cfg.cs_ff, "fF", dev.cs(), "F"),
        ("ic", cfg.ic_ua, "uA", dev.critical_current(), "A"),
        ("es", dev.es() / h / GHZ, "GHz*h", dev.es(), "J"),
        ("cap_per_len", dev.cap_per_len() * 1e12, "pF/m", dev.cap_per_len(), "F/m"),
        ("ind_per_len", dev.ind_per_len() * 1e9, "nH/m", dev.ind_per_len(), "H/m"),
        ("omega2", dev.omega2() / TAU / GHZ, "GHz", dev.omega2(), "rad/s"),
        ("omega3_max", f3_max / TAU / GHZ, "GHz", f3_max, "rad/s"),
        ("omega3_min", f3_min / TAU / GHZ, "GHz", f3_min, "rad/s"),
    ];
    for (name, value, unit, si, si_unit) in rows {
        r.row(vec![name.into(), value.into(), unit.into(), si.into(), si_unit.into()]);
    }
    Ok(r)
}

fn omega3_sweep(cfg: DeviceConfig, dev: &Device, flux_min: f64, flux_max: f64, points: usize) -> Outcome<Report> {
    check_grid(points, 2, flux_min, flux_max, "flux")?;
    let mut r = Report::new("omega3-sweep", cfg, &["flux_over_flux_quantum", "omega3_ghz", "omega2_ghz"]);
    r.param("flux_min", flux_min).param("flux_max", flux_max).param("points", points);
    let f2 = dev.omega2() / TAU / GHZ;
    for flux in linspace(flux_min, flux_max, points) {
        let w3 = omega3(dev, &Boundary::from_flux_quanta(flux)?)?;
        r.row(vec![flux.into(), (w3 / TAU / GHZ).into(), f2.into()]);
    }
    Ok(r)
}

fn spectrum(cfg: DeviceConfig, dev: &Device, bias: &BiasArgs, fmin: f64, fmax: f64, points: usize) -> Outcome<Report> {
    check_grid(points, 16, fmin, fmax, "frequency")?;
    if fmin <= 0.0 {
        return Err(invalid("fmin_ghz", "positive", fmin));
    }
    let bc = resolve_bias(dev, bias)?;
    let s = compute_spectrum(dev, &bc, TAU * fmin * GHZ, TAU * fmax * GHZ, points)?;
    let mut r = Report::new("spectrum", cfg, &["freq_ghz", "phase_rad", "phase_unwrapped_rad", "e_over_p_s"]);
    bias_params(&mut r, dev, &bc)?;
    r.param("fmin_ghz", fmin).param("fmax_ghz", fmax).param("points", points);
    for i in 0..s.len() {
        r.row(vec![
            (s.omega[i] / TAU / GHZ).into(),
            s.phase_shift[i].into(),
            s.phase_unwrapped[i].into(),
            s.e_over_p[i].into(),
        ]);
    }
    Ok(r)
}

fn cavity(cfg: DeviceConfig, dev: &Device, bias: &BiasArgs) -> Outcome<Report> {
    let bc = resolve_bias(dev, bias)?;
    let mut r = Report::new("cavity", cfg, &["method", "omega_c_ghz", "kappa_ghz"]);
    bias_params(&mut r, dev, &bc)?;
    let (lo, hi) = match search_window(dev, &bc) {
        Ok(w) => w,
        Err(e @ CouplerError::Decoupled { detuning_hz }) => {
            r.param("status", "decoupled").param("detuning_hz", detuning_hz).param("message", e.to_string().as_str());
            return Ok(r);
        }
        Err(e) => return Err(e.into()),
    };
    let phase = extract_from_phase(dev, &bc)?;
    let energy = extract_from_energy(dev, &bc)?;
    r.param("status", "ok")
        .param("window_lo_ghz", lo / TAU / GHZ)
        .param("window_hi_ghz", hi / TAU / GHZ)
        .param("omega_c_rel_diff", (energy.omega_c - phase.omega_c).abs() / phase.omega_c)
        .param("kappa_rel_diff", (energy.kappa - phase.kappa).abs() / phase.kappa);
    for (name, p) in [("phase_shift", phase), ("energy_lorentzian", energy)] {
        r.row(vec![name.into(), (p.omega_c / TAU / GHZ).into(), (p.kappa / TAU / GHZ).into()]);
    }
    Ok(r)
}

fn status_of(e: &CouplerError) -> &'static str {
    match e {
        CouplerError::Decoupled { .. } => "decoupled",
        CouplerError::Untunable { .. } => "untunable",
        CouplerError::DivergentNcrit { .. } => "divergent",
        e if e.is_validation() => "invalid",
        _ => "failed",
    }
}

fn targets(explicit: &[f64], lo: f64, hi: f64, points: usize, what: &'static str) -> Outcome<Vec<f64>> {
    if !explicit.is_empty() {
        return Ok(explicit.to_vec());
    }
    check_grid(points, 2, lo, hi, what)?;
    Ok(linspace(lo, hi, points))
}

fn cavity_sweep(cfg: DeviceConfig, dev: &Device, f3: &[f64], lo: f64, hi: f64, points: usize) -> Outcome<Report> {
    let f3 = targets(f3, lo, hi, points, "omega3")?;
    if let Some(&bad) = f3.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(invalid("f3_ghz", "positive", bad));
    }
    let omegas: Vec<f64> = f3.iter().map(|f| TAU * f * GHZ).collect();
    let mut r = Report::new(
        "cavity-sweep",
        cfg,
        &["omega3_ghz", "omega_c_phase_ghz", "kappa_phase_ghz", "omega_c_energy_ghz", "kappa_energy_ghz", "status"],
    );
    r.param("omega2_ghz", dev.omega2() / TAU / GHZ);
    for (f, row) in f3.iter().zip(sweep_vs_boundary(dev, &omegas)) {
        let cells = match row.outcome {
            Ok(p) => vec![
                (*f).into(),
                (p.phase.omega_c / TAU / GHZ).into(),
                (p.phase.kappa / TAU / GHZ).into(),
                (p.energy.omega_c / TAU / GHZ).into(),
                (p.energy.kappa / TAU / GHZ).into(),
                "ok".into(),
            ],
            Err(e) => {
                let mut cells = vec![Cell::from(*f)];
                cells.extend(std::iter::repeat_n(Cell::Missing, 4));
                cells.push(status_of(&e).into());
                cells
            }
        };
        r.row(cells);
    }
    Ok(r)
}

fn ncrit(cfg: DeviceConfig, dev: &Device, l3: &[f64], lo: f64, hi: f64, points: usize) -> Outcome<Report> {
    let l3 = targets(l3, lo, hi, points, "l3")?;
    let mut r = Report::new("ncrit", cfg, &["l3_mm", "n_crit", "tunable", "status"]);
    for mm in l3 {
        let cells = match critical_photon_number(dev, mm * 1e-3) {
            Ok(c) => vec![mm.into(), c.n_crit.into(), c.tunable_to_omega2.into(), "ok".into()],
            Err(e @ CouplerError::Invalid { .. }) => return Err(e.into()),
            Err(e) => {
                let tunable = dev.with_l3(mm * 1e-3).map(|d| coupler::squid::is_tunable_to(&d, d.omega2()));
                vec![mm.into(), Cell::Missing, tunable.unwrap_or(false).into(), status_of(&e).into()]
            }
        };
        r.row(cells);
    }
    Ok(r)
}

fn run(cli: &Cli) -> Outcome<String> {
    let cfg = resolve_config(cli)?;
    let dev: Device = cfg.to_device()?;
    let report = match &cli.command {
        Command::Params => params(cfg, &dev)?,
        Command::Omega3Sweep { flux_min, flux_max, points } => omega3_sweep(cfg, &dev, *flux_min, *flux_max, *points)?,
        Command::Spectrum { bias, fmin_ghz, fmax_ghz, points } => {
            spectrum(cfg, &dev, bias, *fmin_ghz, *fmax_ghz, *points)?
        }
        Command::Cavity { bias } => cavity(cfg, &dev, bias)?,
        Command::CavitySweep { f3_ghz, f3_min_ghz, f3_max_ghz, points } => {
            cavity_sweep(cfg, &dev, f3_ghz, *f3_min_ghz, *f3_max_ghz, *points)?
        }
        Command::Ncrit { l3_values_mm, l3_min_mm, l3_max_mm, points } => {
            ncrit(cfg, &dev, l3_values_mm, *l3_min_mm, *l3_max_mm, *points)?
        }
    };
    let default_format = match cli.command {
        Command::Cavity { .. } => Format::Json,
        _ => Format::Csv,
    };
    Ok(report.render(cli.format.unwrap_or(default_format)))
}

fn emit(target: &str, text: &str) -> Outcome<()> {
    let result = if target == "-" {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes()).and_then(|_| out.flush())
    } else {
        fs::write(target, text)
    };
    result.map_err(|e| Failure::Io(format!("cannot write {target}: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|text| emit(&cli.output, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
