//! One function per subcommand. Pairs run concurrently; each output file is
//! written once, after all pairs finish.

use std::path::{Path, PathBuf};

use qnet_core::finite_key::finite_key_pipeline_with;
use qnet_core::network::{build_tdm_schedule, plan_full_mesh, resource_counts, schedule_table, topology_table, Scheme};
use qnet_core::optimize::{optimize_protocol_with, rate_vs_loss, CurvePoint, OptimizationResult};
use qnet_core::sim::simulate_tally_sharded;
use qnet_core::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{pair_label, parse_filter, Session};
use crate::error::{CliError, Result};
use crate::gain_table::{ingest_gain_table, write_gain_table, GainRecord};
use crate::report::{
    num, report_table, summary_table, write_json, write_text, Format, NetworkSummary, PairReport, Table,
};

pub const GAIN_TABLE_FILE: &str = "gain_table.csv";

/// Options shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub format: Format,
    pub pairs: Option<String>,
    pub input: Option<PathBuf>,
}

fn core_data(e: CoreError) -> CliError {
    CliError::data(e)
}

/// Decorrelates the per-pair streams of one session seed.
pub fn pair_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn apply_seed(session: &mut Session, opts: &RunOptions) {
    if let Some(s) = opts.seed {
        session.config.sim.seed = s;
    }
}

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

/// Simulated tallies of the selected pairs.
pub fn simulate_records(session: &Session, filter: Option<&str>) -> Result<Vec<GainRecord>> {
    let sim = &session.config.sim;
    let n_rounds = session.n_rounds();
    session
        .select_pairs(filter)?
        .par_iter()
        .map(|p| {
            let tally = simulate_tally_sharded(
                &session.link(p.loss_db),
                &session.protocol,
                n_rounds,
                pair_seed(sim.seed, p.index),
                sim.mode,
                sim.shards,
            )
            .map_err(core_data)?;
            Ok(GainRecord { pair: p.label.clone(), session: None, loss_db: Some(p.loss_db), tally })
        })
        .collect()
}

pub fn analyze_records(session: &Session, records: &[GainRecord]) -> Result<Vec<PairReport>> {
    let opts = session.pipeline_options();
    records
        .par_iter()
        .map(|rec| {
            let report = finite_key_pipeline_with(&rec.tally, &session.protocol, &opts)
                .map_err(|e| CliError::Data(format!("{}: {e}", rec.key())))?;
            Ok(PairReport { pair: rec.pair.clone(), session: rec.session, loss_db: rec.loss_db, report })
        })
        .collect()
}

pub fn simulate(mut session: Session, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    apply_seed(&mut session, opts);
    let records = simulate_records(&session, opts.pairs.as_deref())?;
    prepare_out(&opts.out)?;
    let mut written = vec![write_records(&opts.out.join(GAIN_TABLE_FILE), &records, &session)?];
    if opts.format == Format::Json {
        let path = opts.out.join("tallies.json");
        let json: Vec<_> = records.iter().map(TallyJson::from).collect();
        write_json(&path, &json)?;
        written.push(path);
    }
    Ok(written)
}

fn write_records(path: &Path, records: &[GainRecord], session: &Session) -> Result<PathBuf> {
    let sim = &session.config.sim;
    let mode = serde_json::to_value(sim.mode).map_err(CliError::data)?;
    let provenance = [
        "simulated gain table".to_string(),
        format!(
            "mode = {}, rounds per pair = {}, seed = {}, shards = {}",
            mode.as_str().unwrap_or("?"),
            session.n_rounds(),
            sim.seed,
            sim.shards
        ),
    ];
    let lines: Vec<&str> = provenance.iter().map(String::as_str).collect();
    let mut w = crate::report::create(path)?;
    write_gain_table(&mut w, records, &lines).map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

#[derive(Serialize)]
struct EntryJson {
    l: char,
    r: char,
    sent: u64,
    success: u64,
    error: Option<u64>,
}

#[derive(Serialize)]
struct TallyJson {
    pair: String,
    session: Option<u32>,
    loss_db: Option<f64>,
    entries: Vec<EntryJson>,
}

impl From<&GainRecord> for TallyJson {
    fn from(r: &GainRecord) -> Self {
        TallyJson {
            pair: r.pair.clone(),
            session: r.session,
            loss_db: r.loss_db,
            entries: r
                .tally
                .iter()
                .map(|((l, r), e)| EntryJson {
                    l: l.as_char(),
                    r: r.as_char(),
                    sent: e.sent,
                    success: e.success,
                    error: e.error,
                })
                .collect(),
        }
    }
}

/// Reads the gain table named by `--input` or `analysis.gain_table`, or
/// simulates the configured network when neither is given.
pub fn analyze(mut session: Session, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    apply_seed(&mut session, opts);
    let source = opts.input.clone().or_else(|| session.gain_table_path());
    let records = match source {
        Some(path) => {
            let all = ingest_gain_table(&path, &session.protocol)?;
            match opts.pairs.as_deref() {
                None => all,
                Some(f) => {
                    let wanted = parse_filter(f)?;
                    for w in &wanted {
                        if !all.iter().any(|r| &r.pair == w) {
                            return Err(CliError::Config(format!("--pairs: no pair {w} in {}", path.display())));
                        }
                    }
                    all.into_iter().filter(|r| wanted.contains(&r.pair)).collect()
                }
            }
        }
        None => simulate_records(&session, opts.pairs.as_deref())?,
    };
    let reports = analyze_records(&session, &records)?;
    let summary = NetworkSummary::of(&reports);
    prepare_out(&opts.out)?;
    match opts.format {
        Format::Csv => {
            let (a, b) = (opts.out.join("reports.csv"), opts.out.join("summary.csv"));
            report_table(&reports).write(&a)?;
            summary_table(&summary).write(&b)?;
            Ok(vec![a, b])
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Analysis<'a> {
                reports: &'a [PairReport],
                summary: &'a NetworkSummary,
            }
            let path = opts.out.join("analysis.json");
            write_json(&path, &Analysis { reports: &reports, summary: &summary })?;
            Ok(vec![path])
        }
    }
}

/// Optimizes the protocol at `optimize.loss_db`.
pub fn optimize(mut session: Session, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    apply_seed(&mut session, opts);
    let loss = session.config.optimize.loss_db.unwrap_or(session.config.network.loss_db);
    let link = session.link(loss);
    link.validate().map_err(CliError::config)?;
    let result =
        optimize_protocol_with(&link, session.protocol.n_pulses, &session.optimizer_options()).map_err(core_data)?;
    prepare_out(&opts.out)?;
    match opts.format {
        Format::Csv => {
            let (a, b) = (opts.out.join("optimization.csv"), opts.out.join("trace.csv"));
            optimization_table(&result, loss).write(&a)?;
            trace_table(&result).write(&b)?;
            Ok(vec![a, b])
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                loss_db: f64,
                #[serde(flatten)]
                result: &'a OptimizationResult,
            }
            let path = opts.out.join("optimization.json");
            write_json(&path, &Out { loss_db: loss, result: &result })?;
            Ok(vec![path])
        }
    }
}

const PARAM_COLUMNS: [&str; 6] = ["z", "y", "x", "p_z", "p_y", "p_x"];

fn optimization_table(r: &OptimizationResult, loss: f64) -> Table {
    let mut header = vec!["loss_db"];
    header.extend(PARAM_COLUMNS);
    header.extend(["p_o", "rate_per_pulse", "rate_bps"]);
    let mut t = Table::new(&header);
    let p = r.protocol.params();
    let mut row = vec![num(loss)];
    row.extend(p.to_vec().map(num));
    row.extend([num(p.p_o()), num(r.rate_per_pulse), num(r.rate_per_pulse * r.protocol.clock_hz)]);
    t.push(row);
    t
}

fn trace_table(r: &OptimizationResult) -> Table {
    let mut header = vec!["step"];
    header.extend(PARAM_COLUMNS);
    header.push("rate_per_pulse");
    let mut t = Table::new(&header);
    for (i, s) in r.trace.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(s.params.map(num));
        row.push(num(s.rate_per_pulse));
        t.push(row);
    }
    t
}

/// Topology and schedule of `network.n_users` users.
pub fn plan(session: Session, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let n = session.config.network.n_users;
    let topology = plan_full_mesh(n).map_err(CliError::config)?;
    let schedule = build_tdm_schedule(n).map_err(CliError::config)?;
    let counts = [Scheme::Wdm, Scheme::Tdm].map(|s| (s, resource_counts(n, s).expect("n checked")));
    prepare_out(&opts.out)?;
    let (topo, sched) = (opts.out.join("topology.txt"), opts.out.join("schedule.txt"));
    write_text(&topo, &topology_table(&topology))?;
    write_text(&sched, &schedule_table(&schedule))?;
    let mut written = vec![topo, sched];
    let label = |u: usize, v: usize| pair_label(u, v, n);
    match opts.format {
        Format::Csv => {
            let mut r = Table::new(&["scheme", "wavelengths", "bsm_modules", "time_bins", "encoders_per_user"]);
            for (s, c) in counts {
                r.push(vec![
                    scheme_name(s).into(),
                    c.wavelengths.to_string(),
                    c.bsm_modules.to_string(),
                    c.time_bins.to_string(),
                    c.encoders_per_user.to_string(),
                ]);
            }
            let mut slots = Table::new(&["bin", "bsm", "pair"]);
            for s in &schedule.slots {
                slots.push(vec![(s.bin + 1).to_string(), (s.bsm + 1).to_string(), label(s.users[0], s.users[1])]);
            }
            let (a, b) = (opts.out.join("resources.csv"), opts.out.join("slots.csv"));
            r.write(&a)?;
            slots.write(&b)?;
            written.extend([a, b]);
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Plan<'a> {
                n_users: usize,
                wdm: qnet_core::network::ResourceCounts,
                tdm: qnet_core::network::ResourceCounts,
                topology: &'a qnet_core::network::Topology,
                schedule: &'a qnet_core::network::TdmSchedule,
            }
            let path = opts.out.join("plan.json");
            write_json(
                &path,
                &Plan { n_users: n, wdm: counts[0].1, tdm: counts[1].1, topology: &topology, schedule: &schedule },
            )?;
            written.push(path);
        }
    }
    Ok(written)
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Wdm => "wdm",
        Scheme::Tdm => "tdm",
    }
}

pub fn curve(mut session: Session, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    apply_seed(&mut session, opts);
    let c = &session.config.curve;
    let points = rate_vs_loss(
        &session.link(session.config.network.loss_db),
        &c.losses_db,
        session.protocol.n_pulses,
        c.mode,
        &session.optimizer_options(),
    )
    .map_err(core_data)?;
    prepare_out(&opts.out)?;
    let path = opts.out.join(format!("curve.{}", opts.format.extension()));
    match opts.format {
        Format::Csv => curve_table(&points).write(&path)?,
        Format::Json => write_json(&path, &points)?,
    }
    Ok(vec![path])
}

fn curve_table(points: &[CurvePoint]) -> Table {
    let mut header = vec!["loss_db", "rate_per_pulse", "rate_bps"];
    header.extend(PARAM_COLUMNS);
    let mut t = Table::new(&header);
    for p in points {
        t.push(
            [p.loss_db, p.rate_per_pulse, p.rate_bps, p.z, p.y, p.x, p.p_z, p.p_y, p.p_x]
                .into_iter()
                .map(num)
                .collect(),
        );
    }
    t
}
