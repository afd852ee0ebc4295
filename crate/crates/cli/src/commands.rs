use std::str::FromStr;

use entdecay::ensembles::empirical::split_outcomes;
use entdecay::ensembles::{
    cdf_qs, empirical_density, esd_domain, esd_outcomes, ks_distance, linspace, outcome_density, p_c, p_qs,
    separable_probability, DensityCurve, EnsembleStats, Evolve,
};
use entdecay::entanglement::SEPARABLE_TOL;
use entdecay::qstate::{par_map, sample_ensemble, Ensemble};
use entdecay::smallmat::C64;
use entdecay::timemaps::{detect_sudden_events, DephasingKernel, EventKind, ProfileKind, QProfile};
use entdecay::{
    apply_local, concurrence_evolved, concurrence_mixed, concurrence_pure, concurrence_single, esd_time_analytic,
    max_concurrence, ChannelKind, EsdOutcome, Measure, PureState, SideSpec,
};

use crate::output::{emit, emit_text, write_figure, CliError, CliResult, Table};
use crate::svg::Chart;
use crate::{
    Cli, Command, DensityCommand, DensityConcArgs, DensityEsdArgs, EnsembleArgs, EventsArgs, EvolveArgs, FigureArgs,
    GlobalOpts, KernelArg, MeasureArg, ProfileArgs, ProfileName, ProfileSpec, SampleArgs, SideArg, StatsArgs,
};

pub fn run(cli: &Cli) -> CliResult<()> {
    if cli.global.workers == 0 {
        return Err(CliError::usage("--workers must be at least 1"));
    }
    let g = &cli.global;
    match &cli.command {
        Command::Sample(a) => sample(g, a),
        Command::Evolve(a) => evolve(g, a),
        Command::Density(DensityCommand::Esd(a)) => density_esd(g, a),
        Command::Density(DensityCommand::Conc(a)) => density_conc(g, a),
        Command::Stats(a) => stats(g, a),
        Command::Profile(a) => profile(g, a),
        Command::Events(a) => events(g, a),
        Command::Figure(a) => figure(g, a),
    }
}

fn parse_kind(s: &str) -> CliResult<ChannelKind> {
    ChannelKind::from_str(s).map_err(|e| CliError::usage(e.to_string()))
}

fn side(s: SideArg) -> SideSpec {
    match s {
        SideArg::Both => SideSpec::BothQubits,
        SideArg::First => SideSpec::FirstOnly,
    }
}

fn measure(m: MeasureArg) -> Measure {
    match m {
        MeasureArg::Haar => Measure::HaarPure,
        MeasureArg::Hs => Measure::HsMixed,
        MeasureArg::Bures => Measure::BuresMixed,
    }
}

fn parse_psi(parts: &[String]) -> CliResult<PureState> {
    if parts.len() != 4 {
        return Err(CliError::usage("--psi needs exactly four amplitudes"));
    }
    let mut amps = [C64::new(0.0, 0.0); 4];
    for (slot, text) in amps.iter_mut().zip(parts) {
        *slot = C64::from_str(text.trim()).map_err(|_| CliError::usage(format!("cannot parse amplitude '{text}'")))?;
    }
    Ok(PureState::normalized(amps)?)
}

fn q_grid(explicit: &[f64], points: usize) -> CliResult<Vec<f64>> {
    if !explicit.is_empty() {
        if let Some(q) = explicit.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(entdecay::Error::Domain(format!("q = {q} outside [0, 1]")).into());
        }
        return Ok(explicit.to_vec());
    }
    if points < 2 {
        return Err(CliError::usage("--points must be at least 2"));
    }
    Ok(linspace(0.0, 1.0, points))
}

fn draw(g: &GlobalOpts, e: &EnsembleArgs) -> CliResult<(Ensemble, usize)> {
    let n = g.sample_count(e.n);
    Ok((sample_ensemble(measure(e.measure), e.seed, n, g.workers)?, n))
}

fn ensemble_meta(t: Table, e: &EnsembleArgs, n: usize) -> Table {
    t.meta("measure", format!("{:?}", e.measure).to_lowercase()).meta("n", n).meta("seed", e.seed)
}

fn sample(g: &GlobalOpts, a: &SampleArgs) -> CliResult<()> {
    let (ens, n) = draw(g, &a.ensemble)?;
    let mut t = ensemble_meta(Table::new(&["index", "concurrence", "purity"]), &a.ensemble, n);
    match &ens {
        Ensemble::Pure(states) => {
            t.rows = states.iter().enumerate().map(|(i, s)| vec![i as f64, concurrence_pure(s), 1.0]).collect();
        }
        Ensemble::Mixed(states) => {
            let c = par_map(states, g.workers, |r| concurrence_mixed(r).map(|c| (c, r.purity())))?;
            for (i, v) in c.into_iter().enumerate() {
                let (conc, purity) = v?;
                t.rows.push(vec![i as f64, conc, purity]);
            }
        }
    }
    emit(g, &t, None)
}

fn evolve(g: &GlobalOpts, a: &EvolveArgs) -> CliResult<()> {
    let psi = parse_psi(&a.psi)?;
    let kind = parse_kind(&a.kind)?;
    let side = side(a.side);
    let qs = q_grid(&a.q, a.points)?;
    let rho = psi.density();
    let mut t = Table::new(&["q", "closed_form", "kraus"]).meta("kind", kind).meta("c0", psi.c0());
    let esd = psi.esd_time(kind, side, 0.0)?;
    t = t.meta("esd", outcome_label(&esd));
    for &q in &qs {
        let closed = match side {
            SideSpec::BothQubits => concurrence_evolved(kind, q, &psi),
            SideSpec::FirstOnly => concurrence_single(kind, q, psi.c0()),
        };
        let kraus = concurrence_mixed(&apply_local(&rho, kind, q, side)?)?;
        t.rows.push(vec![q, closed, kraus]);
    }
    let chart = Chart::new(&format!("Concurrence under {kind}"), "q", "C")
        .line("closed form", &qs, &t.column("closed_form").unwrap_or_default())
        .dashed("Kraus", &qs, &t.column("kraus").unwrap_or_default());
    emit(g, &t, Some(chart))
}

fn outcome_label(o: &EsdOutcome) -> String {
    match o {
        EsdOutcome::FiniteTime(q) => format!("{q}"),
        EsdOutcome::AsymptoticOnly => "asymptotic".into(),
        EsdOutcome::InitiallySeparable => "separable".into(),
    }
}

fn density_esd(g: &GlobalOpts, a: &DensityEsdArgs) -> CliResult<()> {
    let kind = parse_kind(&a.kind)?;
    let side = side(a.side);
    if a.bins < 2 {
        return Err(CliError::usage("--bins must be at least 2"));
    }
    let (ens, n) = draw(g, &a.ensemble)?;
    let analytic = matches!(ens, Ensemble::Pure(_)) && side == SideSpec::BothQubits;
    let domain = if analytic { esd_domain(kind) } else { (0.0, 1.0) };
    let outcomes = match &ens {
        Ensemble::Pure(s) => esd_outcomes(s, kind, side, a.tol, g.workers)?,
        Ensemble::Mixed(s) => esd_outcomes(s, kind, side, a.tol, g.workers)?,
    };
    let empirical = outcome_density(&outcomes, a.bins, domain)?;
    let (times, asymptotic, separable) = split_outcomes(&outcomes);

    let mut columns = vec!["q"];
    if analytic {
        columns.push("analytic");
    }
    columns.push("empirical");
    let mut t = ensemble_meta(Table::new(&columns), &a.ensemble, n)
        .meta("kind", kind)
        .meta("side", format!("{side:?}"))
        .meta("bins", a.bins)
        .meta("finite", times.len())
        .meta("asymptotic", asymptotic)
        .meta("initially_separable", separable);
    let mut analytic_values = Vec::new();
    if analytic {
        for &q in &empirical.grid {
            analytic_values.push(analytic_esd_value(kind, q)?);
        }
        let ks = ks_distance(&times, asymptotic + separable, |q| cdf_qs(kind, q.min(1.0)).unwrap_or(f64::NAN));
        t = t.meta("ks", ks);
        if kind == ChannelKind::AmplitudeDamping {
            t.trailer.push(format!("mass,analytic,1,{}", entdecay::ensembles::analytic::AD_ASYMPTOTIC_WEIGHT));
        }
    }
    for (i, (&q, &v)) in empirical.grid.iter().zip(&empirical.values).enumerate() {
        let mut row = vec![q];
        if analytic {
            row.push(analytic_values[i]);
        }
        row.push(v);
        t.rows.push(row);
    }
    for (x, w) in &empirical.point_masses {
        t.trailer.push(format!("mass,empirical,{x},{w}"));
    }
    let mut chart = Chart::new(&format!("ESD-time density, {kind}"), "q_S", "p(q_S)");
    if analytic {
        chart = chart.line("analytic", &empirical.grid, &analytic_values);
    }
    chart = chart.dashed("empirical", &empirical.grid, &empirical.values);
    emit(g, &t, Some(chart))
}

/// Continuous part of `p(q_S)`, extended by 0 at the open PD endpoint.
fn analytic_esd_value(kind: ChannelKind, q: f64) -> CliResult<f64> {
    if kind == ChannelKind::PhaseDamping && q >= 1.0 {
        return Ok(0.0);
    }
    Ok(p_qs(kind, q)?.continuous)
}

fn density_conc(g: &GlobalOpts, a: &DensityConcArgs) -> CliResult<()> {
    let kind = parse_kind(&a.kind)?;
    if !(0.0..1.0).contains(&a.q) {
        return Err(entdecay::Error::Domain(format!("q = {} outside [0, 1)", a.q)).into());
    }
    if a.bins < 2 {
        return Err(CliError::usage("--bins must be at least 2"));
    }
    let (ens, n) = draw(g, &a.ensemble)?;
    let analytic = matches!(ens, Ensemble::Pure(_));
    let c_max = max_concurrence(kind, a.q);
    let hi = if analytic { c_max } else { 1.0 };
    if hi <= 0.0 {
        return Err(entdecay::Error::Domain(format!("every state is separable at q = {}", a.q)).into());
    }
    let values: Vec<f64> = match &ens {
        Ensemble::Pure(s) => s.iter().map(|p| concurrence_evolved(kind, a.q, p)).collect(),
        Ensemble::Mixed(s) => par_map(s, g.workers, |r| r.evolved_concurrence(kind, a.q, SideSpec::BothQubits))?
            .into_iter()
            .collect::<entdecay::Result<Vec<_>>>()?,
    };
    let entangled: Vec<f64> = values.iter().filter(|&&c| c > SEPARABLE_TOL).map(|&c| c.min(hi)).collect();
    let sep_fraction = 1.0 - entangled.len() as f64 / n as f64;
    let empirical = conc_histogram(&entangled, n, a.bins, hi)?;

    let mut columns = vec!["c"];
    if analytic {
        columns.push("analytic");
    }
    columns.push("empirical");
    let mut t = ensemble_meta(Table::new(&columns), &a.ensemble, n)
        .meta("kind", kind)
        .meta("q", a.q)
        .meta("bins", a.bins)
        .meta("c_max", c_max);
    let mut analytic_values = Vec::new();
    if analytic {
        for &c in &empirical.grid {
            analytic_values.push(p_c(kind, c, a.q)?);
        }
        t.trailer.push(format!("mass,analytic,0,{}", separable_probability(kind, a.q)?));
    }
    for (i, (&c, &v)) in empirical.grid.iter().zip(&empirical.values).enumerate() {
        let mut row = vec![c];
        if analytic {
            row.push(analytic_values[i]);
        }
        row.push(v);
        t.rows.push(row);
    }
    t.trailer.push(format!("mass,empirical,0,{sep_fraction}"));
    let mut chart = Chart::new(&format!("Concurrence density, {kind}, q = {}", a.q), "C", "p(C; q)");
    if analytic {
        chart = chart.line("analytic", &empirical.grid, &analytic_values);
    }
    chart = chart.dashed("empirical", &empirical.grid, &empirical.values);
    emit(g, &t, Some(chart))
}

// Histogram of the entangled samples on [0, hi], scaled to their share of n.
fn conc_histogram(entangled: &[f64], n: usize, bins: usize, hi: f64) -> CliResult<DensityCurve> {
    if entangled.is_empty() {
        let grid = linspace(0.0, hi, bins + 2);
        return Ok(DensityCurve::new(grid, vec![0.0; bins + 2], vec![], (0.0, hi))?);
    }
    let mut curve = empirical_density(entangled, 0, bins, (0.0, hi))?;
    let share = entangled.len() as f64 / n as f64;
    if !curve.point_masses.is_empty() {
        // a single repeated value; spread it over its bin instead
        curve.point_masses.clear();
        let width = hi / bins as f64;
        let i = ((entangled[0] / width) as usize).min(bins - 1);
        curve.values[i + 1] = 1.0 / width;
    }
    for v in &mut curve.values {
        *v *= share;
    }
    Ok(curve)
}

fn stats(g: &GlobalOpts, a: &StatsArgs) -> CliResult<()> {
    let kind = parse_kind(&a.kind)?;
    let side = side(a.side);
    let qs = q_grid(&a.q, a.points)?;
    let (ens, n) = draw(g, &a.ensemble)?;
    let per_q: Vec<EnsembleStats> = par_map(&qs, g.workers, |&q| match &ens {
        Ensemble::Pure(s) => entdecay::ensembles::ensemble_stats(kind, q, s, side),
        Ensemble::Mixed(s) => entdecay::ensembles::ensemble_stats(kind, q, s, side),
    })?
    .into_iter()
    .collect::<entdecay::Result<Vec<_>>>()?;
    let analytic = matches!(ens, Ensemble::Pure(_)) && side == SideSpec::BothQubits;
    let mut columns = vec!["q", "mean", "std", "separable_fraction", "max_seen", "c_max"];
    if analytic {
        columns.push("separable_analytic");
    }
    let mut t = ensemble_meta(Table::new(&columns), &a.ensemble, n).meta("kind", kind).meta("side", format!("{side:?}"));
    for (&q, st) in qs.iter().zip(&per_q) {
        let c_max = match side {
            SideSpec::BothQubits => max_concurrence(kind, q),
            SideSpec::FirstOnly => concurrence_single(kind, q, 1.0),
        };
        let mut row = vec![q, st.mean, st.std, st.separable_fraction, st.max_seen, c_max];
        if analytic {
            row.push(separable_probability(kind, q)?);
        }
        t.rows.push(row);
    }
    let chart = stats_chart(&format!("Average concurrence, {kind}"), &t);
    emit(g, &t, Some(chart))
}

fn stats_chart(title: &str, t: &Table) -> Chart {
    let col = |name: &str| t.column(name).unwrap_or_default();
    let (qs, mean, std) = (col("q"), col("mean"), col("std"));
    let upper: Vec<f64> = mean.iter().zip(&std).map(|(m, s)| m + s).collect();
    let lower: Vec<f64> = mean.iter().zip(&std).map(|(m, s)| (m - s).max(0.0)).collect();
    Chart::new(title, "q", "C")
        .line("mean", &qs, &mean)
        .dashed("mean + std", &qs, &upper)
        .dashed("mean − std", &qs, &lower)
        .line("C_M", &qs, &col("c_max"))
        .line("separable", &qs, &col("separable_fraction"))
}

fn build_profile(spec: &ProfileSpec) -> CliResult<QProfile> {
    let kind = match spec.name {
        ProfileName::Markov => ProfileKind::MarkovConstant { gamma: spec.gamma },
        ProfileName::Nonautonomous => {
            ProfileKind::NonAutonomous { gamma_env: spec.gamma_env, gamma_rate: spec.gamma_rate }
        }
        ProfileName::Pseudomode => ProfileKind::PseudomodeAd { lambda: spec.lambda, gamma0: spec.gamma0 },
        ProfileName::Ohmic => ProfileKind::OhmicDephasing {
            lambda: spec.lambda,
            temperature: spec.temperature,
            kernel: match spec.kernel {
                KernelArg::Single => DephasingKernel::SinglePower,
                KernelArg::Squared => DephasingKernel::SquaredPower,
            },
        },
        ProfileName::Oscillator => ProfileKind::SingleOscillatorDephasing {
            omega: spec.omega,
            coupling: spec.coupling,
            temperature: spec.temperature,
        },
    };
    Ok(QProfile::new(kind)?)
}

fn t_grid(spec: &ProfileSpec) -> CliResult<Vec<f64>> {
    if !(spec.t_max > 0.0 && spec.t_max.is_finite()) {
        return Err(entdecay::Error::Domain(format!("--t-max must be positive, got {}", spec.t_max)).into());
    }
    if spec.points < 2 {
        return Err(CliError::usage("--points must be at least 2"));
    }
    Ok(linspace(0.0, spec.t_max, spec.points))
}

fn profile(g: &GlobalOpts, a: &ProfileArgs) -> CliResult<()> {
    let p = build_profile(&a.spec)?;
    let ts = t_grid(&a.spec)?;
    let tab = p.tabulate(&ts, g.workers)?;
    let qs: Vec<f64> = tab.samples.as_ref().map(|s| s.iter().map(|x| x.1).collect()).unwrap_or_default();
    let chart = Chart::new("Time profile", "t", "q(t)").line(&format!("{:?}", a.spec.name).to_lowercase(), &ts, &qs);
    let csv = tab.to_csv()?;
    let json = serde_json::from_str(&tab.to_json()?)?;
    emit_text(g, csv, json, Some(chart))
}

fn events(g: &GlobalOpts, a: &EventsArgs) -> CliResult<()> {
    let psi = parse_psi(&a.psi)?;
    let kind = parse_kind(&a.channel)?;
    let p = build_profile(&a.spec)?;
    let ts = t_grid(&a.spec)?;
    let found = detect_sudden_events(&psi, kind, &p, &ts)?;
    let q_s = outcome_label(&esd_time_analytic(kind, &psi));
    let mut csv = format!("# version,{}\n# channel,{kind}\n# q_s,{q_s}\ntime,kind,state_index\n", env!("CARGO_PKG_VERSION"));
    for e in &found {
        let label = match e.kind {
            EventKind::Death => "death",
            EventKind::Birth => "birth",
        };
        csv.push_str(&format!("{},{label},{}\n", e.time, e.state_index));
    }
    let json = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "channel": kind.to_string(),
        "q_s": q_s,
        "events": found,
    });
    emit_text(g, csv, json, None)
}

fn figure(g: &GlobalOpts, a: &FigureArgs) -> CliResult<()> {
    let (table, chart) = match a.number {
        1 => figure_esd_densities()?,
        2 => figure_average(g, a, ChannelKind::Depolarizing)?,
        3 => figure_average(g, a, ChannelKind::AmplitudeDamping)?,
        4 => figure_average(g, a, ChannelKind::PhaseDamping)?,
        _ => figure_profiles(g)?,
    };
    let paths = write_figure(&a.out_dir, &format!("fig{}", a.number), &table, &chart)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

const FIGURE_GRID: usize = 512;

fn figure_esd_densities() -> CliResult<(Table, Chart)> {
    let qs = linspace(0.0, 1.0, FIGURE_GRID);
    let mut t = Table::new(&["q", "D", "AD", "PD"]);
    let d_hi = esd_domain(ChannelKind::Depolarizing).1;
    for &q in &qs {
        let d = if q <= d_hi { p_qs(ChannelKind::Depolarizing, q)?.continuous } else { 0.0 };
        let ad = p_qs(ChannelKind::AmplitudeDamping, q)?.continuous;
        let pd = analytic_esd_value(ChannelKind::PhaseDamping, q)?;
        t.rows.push(vec![q, d, ad, pd]);
    }
    let argmax = |name: &str| {
        let col = t.column(name).unwrap_or_default();
        let i = (0..col.len()).max_by(|&a, &b| col[a].total_cmp(&col[b])).unwrap_or(0);
        qs[i]
    };
    let (d_peak, pd_peak) = (argmax("D"), argmax("PD"));
    t = t.meta("argmax_D", d_peak).meta("argmax_PD", pd_peak);
    t.trailer.push(format!("mass,AD,1,{}", entdecay::ensembles::analytic::AD_ASYMPTOTIC_WEIGHT));
    let col = |name: &str| t.column(name).unwrap_or_default();
    let chart = Chart::new("ESD-time densities", "q_S", "p(q_S)")
        .line("D", &qs, &col("D"))
        .line("AD (+ mass at 1)", &qs, &col("AD"))
        .line("PD", &qs, &col("PD"));
    Ok((t, chart))
}

fn figure_average(g: &GlobalOpts, a: &FigureArgs, kind: ChannelKind) -> CliResult<(Table, Chart)> {
    let n = g.sample_count(a.n);
    let states = match sample_ensemble(Measure::HaarPure, a.seed, n, g.workers)? {
        Ensemble::Pure(s) => s,
        Ensemble::Mixed(_) => return Err(entdecay::Error::Internal("expected pure states".into()).into()),
    };
    let qs = linspace(0.0, 1.0, 51);
    let per_q = par_map(&qs, g.workers, |&q| {
        entdecay::ensembles::ensemble_stats(kind, q, &states, SideSpec::BothQubits)
    })?
    .into_iter()
    .collect::<entdecay::Result<Vec<_>>>()?;
    let mut t = Table::new(&["q", "mean", "std", "separable_fraction", "max_seen", "c_max", "separable_analytic"])
        .meta("kind", kind)
        .meta("measure", "haar")
        .meta("n", n)
        .meta("seed", a.seed);
    for (&q, st) in qs.iter().zip(&per_q) {
        t.rows.push(vec![
            q,
            st.mean,
            st.std,
            st.separable_fraction,
            st.max_seen,
            max_concurrence(kind, q),
            separable_probability(kind, q)?,
        ]);
    }
    let chart = stats_chart(&format!("Average concurrence, {kind}"), &t);
    Ok((t, chart))
}

fn figure_profiles(g: &GlobalOpts) -> CliResult<(Table, Chart)> {
    let ts = linspace(0.0, 10.0, 401);
    let profiles = [
        ("markov", QProfile::markov(1.0)?),
        ("ohmic_T1", QProfile::ohmic(1.0, 1.0)?),
        ("pseudomode", QProfile::pseudomode(1.0, 4.0)?),
        ("ohmic_T0", QProfile::ohmic(1.0, 0.0)?),
        (
            "oscillator",
            QProfile::new(ProfileKind::SingleOscillatorDephasing { omega: 1.0, coupling: 0.5, temperature: 0.0 })?,
        ),
    ];
    let mut columns = vec!["t"];
    columns.extend(profiles.iter().map(|(n, _)| *n));
    let mut t = Table::new(&columns).meta("lambda", 1.0).meta("gamma0", 4.0).meta("gamma", 1.0);
    let mut tabs = Vec::new();
    for (_, p) in &profiles {
        let tab = p.tabulate(&ts, g.workers)?;
        tabs.push(tab.samples.unwrap_or_default());
    }
    for (i, &time) in ts.iter().enumerate() {
        let mut row = vec![time];
        row.extend(tabs.iter().map(|s| s[i].1));
        t.rows.push(row);
    }
    let mut chart = Chart::new("Time profiles q(t)", "λt", "q(t)");
    for (k, (name, _)) in profiles.iter().enumerate() {
        let ys: Vec<f64> = tabs[k].iter().map(|s| s.1).collect();
        chart = if *name == "pseudomode" { chart.dashed(name, &ts, &ys) } else { chart.line(name, &ts, &ys) };
    }
    Ok((t, chart))
}
