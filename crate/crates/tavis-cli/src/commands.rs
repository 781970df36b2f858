//! Command implementations.
//!
//! Each command reads the resolved [`RunConfig`], computes through the
//! library, and writes its CSV files into the output directory. `run`
//! finishes by writing a manifest with one checksum per emitted file, so a
//! run is complete exactly when manifest.toml exists.

use nalgebra::DVector;
use tavis::basis::TruncatedBasis;
use tavis::operators::{build_coupling, build_hamiltonian};
use tavis::pulse::{gaussian_pulse, rising_exponential, PulseShape, TimeGrid};
use tavis::{C64, SystemParams};

use crate::config::{Command, PulseSpec, RunConfig};
use crate::error::Result;
use crate::output::{cell, write_manifest, CsvFile};

/// Executes the configured command and writes all outputs plus the manifest.
/// `config_bytes` is the config file exactly as read; its hash goes into the
/// manifest. `threads` > 1 enables a worker pool for grid sweeps only.
pub fn run(cfg: &RunConfig, config_bytes: &[u8], threads: usize) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| crate::error::CliError::Io(format!("{}: {e}", cfg.out_dir.display())))?;
    let files = match cfg.command {
        Command::Model => model(cfg)?,
        Command::Transfer => transfer(cfg, threads)?,
        Command::Decompose => decompose(cfg)?,
        Command::Response => response(cfg)?,
        Command::AnalyticState => analytic_state(cfg)?,
        Command::Master => master(cfg)?,
        Command::Multiphoton => multiphoton(cfg)?,
    };
    write_manifest(&cfg.out_dir, config_bytes, files)
}

/// `model`: the truncated-space operators behind everything else, as labeled
/// sparse triplets. One block per operator: the Hamiltonian and the collapse
/// operator √κ·a.
fn model(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let basis = TruncatedBasis::new(cfg.params.n_atoms, cfg.max_cavity_photons)?;
    let h = build_hamiltonian(&cfg.params, &basis)?;
    let l = build_coupling(&cfg.params, &basis)?;
    let mut f = CsvFile::create(
        &cfg.out_dir,
        "model.csv",
        "block [text],row [1],row_label [ket],col [1],col_label [ket],re [rad/time],im [rad/time]",
    )?;
    for (name, op) in [("hamiltonian", &h), ("collapse", &l)] {
        for r in 0..op.nrows() {
            for c in 0..op.ncols() {
                let v = op[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    f.row([
                        name.to_string(),
                        r.to_string(),
                        basis.label(r),
                        c.to_string(),
                        basis.label(c),
                        cell(v.re),
                        cell(v.im),
                    ])?;
                }
            }
        }
    }
    Ok(vec![f.finish()?])
}

/// `transfer`: reflection coefficient G(iω) on the configured frequency
/// window. The sweep is the one place a worker pool helps; results are
/// written in frequency order either way.
fn transfer(cfg: &RunConfig, threads: usize) -> Result<Vec<(String, String)>> {
    let g = &cfg.grid;
    let n = ((g.omega_max - g.omega_min) / g.d_omega).round() as usize + 1;
    let eval = |i: usize| {
        let omega = g.omega_min + i as f64 * g.d_omega;
        tavis::linear::transfer_product_form(&cfg.params, C64::new(0.0, omega))
            .map(|t| (omega, t))
    };
    let evals: Vec<(f64, tavis::TransferEval)> = if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::error::CliError::Io(format!("thread pool: {e}")))?;
        pool.install(|| (0..n).into_par_iter().map(eval).collect::<tavis::Result<Vec<_>>>())?
    } else {
        (0..n).map(eval).collect::<tavis::Result<Vec<_>>>()?
    };
    let mut f = CsvFile::create(
        &cfg.out_dir,
        "transfer.csv",
        "omega [rad/time],re_G [1],im_G [1],abs_T_sq [1]",
    )?;
    for (omega, t) in &evals {
        f.row([
            cell(*omega),
            cell(t.g_value.re),
            cell(t.g_value.im),
            cell(t.t_value.norm_sqr()),
        ])?;
    }
    Ok(vec![f.finish()?])
}

/// `decompose`: the orthogonal dark/bright basis change and the reduced
/// controllable-observable model it exposes.
fn decompose(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let d = tavis::decompose::structural_decompose(&cfg.params)?;
    let co = tavis::decompose::co_subsystem(&d, &cfg.params)?;
    let n = cfg.params.n_atoms;
    let coord = |i: usize| if i < n { format!("atom{}", i + 1) } else { "cavity".to_string() };
    let mode = |i: usize| if i < n { format!("mode{}", i + 1) } else { "cavity".to_string() };

    let mut tf =
        CsvFile::create(&cfg.out_dir, "transform.csv", "row [original],col [transformed],value [1]")?;
    for r in 0..d.transform.nrows() {
        for c in 0..d.transform.ncols() {
            tf.row([coord(r), mode(c), cell(d.transform[(r, c)])])?;
        }
    }

    let mut cm = CsvFile::create(
        &cfg.out_dir,
        "co_model.csv",
        "block [text],row [1],col [1],re [rad/time for a; (rad/time)^0.5 for b and c],\
         im [rad/time for a; (rad/time)^0.5 for b and c]",
    )?;
    for r in 0..co.a_matrix.nrows() {
        for c in 0..co.a_matrix.ncols() {
            let v = co.a_matrix[(r, c)];
            cm.row(["a".into(), r.to_string(), c.to_string(), cell(v.re), cell(v.im)])?;
        }
    }
    for r in 0..co.b_vector.len() {
        let v = co.b_vector[r];
        cm.row(["b".into(), r.to_string(), "0".into(), cell(v.re), cell(v.im)])?;
    }
    for c in 0..co.c_vector.len() {
        let v = co.c_vector[c];
        cm.row(["c".into(), "0".into(), c.to_string(), cell(v.re), cell(v.im)])?;
    }
    Ok(vec![tf.finish()?, cm.finish()?])
}

fn build_pulse(spec: PulseSpec, span: (f64, f64), dt: f64) -> Result<PulseShape> {
    let grid = TimeGrid::from_span(span.0, span.1, dt)?;
    let xi = match spec {
        PulseSpec::RisingExp { gamma } => rising_exponential(gamma, grid)?,
        PulseSpec::Gaussian { omega_pulse, t_p } => gaussian_pulse(omega_pulse, t_p, grid)?,
    };
    Ok(xi)
}

/// Natural support span of a pulse: the rising exponential lives at t ≤ 0,
/// the Gaussian within ±6 amplitude widths of its center.
fn pulse_span(spec: PulseSpec, t_min: f64) -> (f64, f64) {
    match spec {
        PulseSpec::RisingExp { .. } => (t_min, 0.0),
        PulseSpec::Gaussian { omega_pulse, t_p } => {
            (t_p - 6.0 / omega_pulse, t_p + 6.0 / omega_pulse)
        }
    }
}

/// `response`: single-photon input pulse and the reflected output pulse on
/// one time grid.
fn response(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let g = &cfg.grid;
    let spec = cfg.pulse.expect("validated: response requires a pulse");
    let (lo, hi) = pulse_span(spec, g.t_min);
    let span = (lo.max(g.t_min), hi.min(g.t_max));
    let xi = build_pulse(spec, span, g.dt)?;
    let out_grid = TimeGrid::from_span(g.t_min, g.t_max, g.dt)?;
    let eta = tavis::response::single_photon_response(&cfg.params, &xi, out_grid)?;
    let mut f = CsvFile::create(
        &cfg.out_dir,
        "response.csv",
        "t [time],abs_xi_sq [1/time],abs_eta_sq [1/time]",
    )?;
    for (k, v) in eta.values.iter().enumerate() {
        let t = out_grid.center(k);
        f.row([cell(t), cell(xi.value_at(t).norm_sqr()), cell(v.norm_sqr())])?;
    }
    Ok(vec![f.finish()?])
}

/// `analytic-state`: closed-form single-excitation amplitudes sampled on the
/// output time grid. The radiated column closes the probability ledger.
fn analytic_state(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let g = &cfg.grid;
    let ket = cfg.ket.as_deref().expect("validated: analytic-state requires a ket");
    let n = cfg.params.n_atoms;
    let k = ket.chars().position(|c| c == 'e').expect("validated: one excited atom") + 1;
    // An empty waveform grid skips the per-sample emission profile; the
    // radiated probability follows from unitarity instead.
    let empty = TimeGrid { c0: 0, len: 0, dt: g.dt };
    let steps = (g.t_max / g.dt).round() as usize;
    let mut header = String::from("t [time]");
    for j in 1..=n {
        header.push_str(&format!(",abs_c_atom{j} [1]"));
    }
    header.push_str(",abs_c_cavity [1],radiated_prob [1]");
    let mut f = CsvFile::create(&cfg.out_dir, "state.csv", &header)?;
    for s in 0..=steps {
        let t = s as f64 * g.dt;
        let st = tavis::excitation::analytic_state_with_grid(&cfg.params, k, t, empty)?;
        let system: f64 =
            st.c.iter().map(|v| v.norm_sqr()).sum::<f64>() + st.c_cavity.norm_sqr();
        let mut row = vec![cell(t)];
        row.extend(st.c.iter().map(|v| cell(v.norm())));
        row.push(cell(st.c_cavity.norm()));
        row.push(cell(1.0 - system));
        f.row(row)?;
    }
    Ok(vec![f.finish()?])
}

/// `master`: open-system trajectory from the configured ket, with the
/// single-photon drive hierarchy when a pulse is configured.
fn master(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let g = &cfg.grid;
    let basis = TruncatedBasis::new(cfg.params.n_atoms, cfg.max_cavity_photons)?;
    let ket = cfg.ket.as_deref().expect("validated: master requires a ket");
    let idx = basis.parse_ket(ket)?;
    let dim = basis.dimension();
    let mut v = DVector::<C64>::zeros(dim);
    v[idx] = C64::new(1.0, 0.0);
    let rho0 = &v * v.adjoint();

    let mut f = CsvFile::create(
        &cfg.out_dir,
        "master.csv",
        "t [time],p_tls1 [1],trace_rho [1],ground_fidelity [1]",
    )?;
    let mut emit = |t: f64, rho: &tavis::DensityMatrix| -> Result<()> {
        f.row([
            cell(t),
            cell(tavis::master::atom1_excitation_probability(rho, &basis)),
            cell(rho.trace().re),
            cell(tavis::master::ground_fidelity(rho)),
        ])
    };
    match cfg.pulse {
        None => {
            let traj =
                tavis::master::integrate_vacuum_master(&cfg.params, &rho0, (0.0, g.t_max), g.dt)?;
            for (t, rho) in traj.times.iter().zip(&traj.states) {
                emit(*t, rho)?;
            }
        }
        Some(spec) => {
            let span = pulse_span(spec, g.t_min);
            let xi = build_pulse(spec, span, g.dt)?;
            let traj = tavis::master::integrate_fock_master(
                &cfg.params,
                &xi,
                &rho0,
                (0.0, g.t_max),
                g.dt,
            )?;
            for st in &traj.states {
                emit(st.time, &st.rho11)?;
            }
        }
    }
    Ok(vec![f.finish()?])
}

/// Heatmap cell count per axis: coarse enough that the configuration count
/// stays polynomial, fine enough to resolve the interference structure.
const PLOT_CELLS_K2: usize = 120;
const PLOT_CELLS_K3: usize = 40;

/// `multiphoton`: sector norms over time, the steady surviving amplitudes,
/// the normalized one-photon branch pulses, and coarse symmetric densities
/// for the two- and three-photon sectors.
fn multiphoton(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let g = &cfg.grid;
    let params: &SystemParams = &cfg.params;
    let basis = TruncatedBasis::new(params.n_atoms, cfg.max_cavity_photons)?;
    let ket = cfg.ket.as_deref().expect("validated: multiphoton requires a ket");
    let idx = basis.parse_ket(ket)?;
    let excitation = basis.excitation(idx);
    let mut v0 = DVector::<C64>::zeros(basis.dimension());
    v0[idx] = C64::new(1.0, 0.0);

    let mut files = Vec::new();

    let traj = tavis::multiphoton::sector_norm_trajectory(params, &v0, g.t_max, g.dt, excitation)?;
    let mut header = String::from("t [time]");
    for k in 0..=excitation {
        header.push_str(&format!(",norm_k{k} [1]"));
    }
    header.push_str(",total [1]");
    let mut nf = CsvFile::create(&cfg.out_dir, "norms.csv", &header)?;
    for (t, row) in traj.times.iter().zip(&traj.norms) {
        let mut cells = vec![cell(*t)];
        cells.extend(row.iter().map(|x| cell(*x)));
        cells.push(cell(row.iter().sum()));
        nf.row(cells)?;
    }
    files.push(nf.finish()?);

    let steady = tavis::multiphoton::steady_output_state(params, &v0, g.t_max, g.dt)?;
    let mut sf = CsvFile::create(
        &cfg.out_dir,
        "steady_amplitudes.csv",
        "photon_count [1],basis_index [1],basis_label [ket],amplitude [1],sector_norm [1]",
    )?;
    for (k, amps) in steady.amplitudes.iter().enumerate() {
        for (b, amp) in amps {
            sf.row([
                k.to_string(),
                b.to_string(),
                basis.label(*b),
                cell(*amp),
                cell(steady.sector_norms[k]),
            ])?;
        }
    }
    files.push(sf.finish()?);

    if excitation >= 1 {
        let mut pf = CsvFile::create(
            &cfg.out_dir,
            "pulse_k1.csv",
            "branch_label [ket],t [time],abs_eta_sq [1/time]",
        )?;
        for (b, samples) in &steady.branch_pulses {
            let label = basis.label(*b);
            for (c, val) in samples.iter().enumerate() {
                let t = (c as f64 + 0.5) * steady.grid_step;
                pf.row([label.clone(), cell(t), cell(val.norm_sqr())])?;
            }
        }
        files.push(pf.finish()?);
    }

    // Symmetric densities on coarse plotting grids. The sector recursion is
    // rerun at the coarse step, so the heatmap is an independent short-time
    // computation rather than a downsample.
    for (k, cells_per_axis, name) in
        [(2usize, PLOT_CELLS_K2, "density_k2.csv"), (3, PLOT_CELLS_K3, "density_k3.csv")]
    {
        if excitation < k {
            continue;
        }
        let span = g.t_max.min(12.0 / params.kappa.max(1e-30));
        let step = span / cells_per_axis as f64;
        let sectors = tavis::multiphoton::sector_wavefunctions(params, &v0, span, step, k)?;
        let plot = tavis::multiphoton::symmetrize_for_plot(&sectors[k])?;
        let mut header = String::new();
        for j in 1..=k {
            header.push_str(&format!("t{j} [time],"));
        }
        header.push_str(&format!("density [1/time^{k}]"));
        let mut df = CsvFile::create(&cfg.out_dir, name, &header)?;
        let n = plot.n_cells;
        let mut idx = vec![0usize; k];
        for (flat, val) in plot.values.iter().enumerate() {
            let mut rem = flat;
            for j in (0..k).rev() {
                idx[j] = rem % n;
                rem /= n;
            }
            let mut row: Vec<String> =
                idx.iter().map(|&c| cell((c as f64 + 0.5) * plot.grid_step)).collect();
            row.push(cell(*val));
            df.row(row)?;
        }
        files.push(df.finish()?);
    }

    Ok(files)
}
