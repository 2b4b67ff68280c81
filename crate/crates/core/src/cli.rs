//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 on domain errors, 2 on usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::board::{self, Board, BoardError, Cell, START};
use crate::census::{self, CensusConfig, CensusError, CensusReport, Stratum};
use crate::classify::{self, ClassifyError, Verdict};
use crate::enumerate::{self, BigCount, EnumerateError, PermutationFactor, DISPLAY_DIGITS};
use crate::markov::{self, MarkovError, StatePermutation, TransitionMatrix};
use crate::simulate::{self, SimConfig, SimError, DEFAULT_MAX_MOVES};
use crate::structural::{self, StructuralError, StructuralReport};

#[derive(Debug, Parser)]
#[command(name = "moksha", version, about = "Analyse chutes-and-ladders boards")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct BoardArg {
    /// Inline board, e.g. "94>89,95>69" or "2([5,23],[60,10])".
    #[arg(long, allow_hyphen_values = true)]
    pub board: Option<String>,
    /// File with one `entrance exit` pair per line.
    #[arg(long)]
    pub board_file: Option<PathBuf>,
}

impl BoardArg {
    fn load(&self) -> Result<Board, BoardError> {
        match (&self.board, &self.board_file) {
            (Some(text), _) => board::parse_board(text),
            (None, Some(path)) => board::read_board_file(path),
            (None, None) => unreachable!("clap requires one board source"),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a board and report its normalized form.
    Validate {
        #[command(flatten)]
        board: BoardArg,
        #[arg(long)]
        json: bool,
    },
    /// Print the canonical N([..],[..]) name.
    Name {
        #[command(flatten)]
        board: BoardArg,
        #[arg(long)]
        json: bool,
    },
    /// Ground-truth winnability verdict.
    Classify {
        #[command(flatten)]
        board: BoardArg,
        #[arg(long)]
        json: bool,
    },
    /// Chute-barriers, trap regions and the flowchart verdict.
    Structural {
        #[command(flatten)]
        board: BoardArg,
        #[arg(long)]
        json: bool,
    },
    /// Dump the transition matrix as rows of `a/6`.
    Matrix {
        #[command(flatten)]
        board: BoardArg,
        /// Reorder states by the block certificate, if there is one.
        #[arg(long)]
        certificate: bool,
    },
    /// Write the transition matrix as a PGM image.
    Heatmap {
        #[command(flatten)]
        board: BoardArg,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long)]
        certificate: bool,
    },
    /// Win probability, game-length distribution and stationary supports.
    Stats {
        #[command(flatten)]
        board: BoardArg,
        /// Largest move count for the length distribution.
        #[arg(long, default_value_t = 200)]
        moves: usize,
        #[arg(long)]
        json: bool,
    },
    /// Exact board counts.
    Count {
        /// Largest component count listed.
        #[arg(long, default_value_t = enumerate::MAX_DISTINCT_COMPONENTS)]
        max_n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Winnable-fraction and shared-exit bounds.
    Bounds {
        /// Use N!/(N-n)! instead of N!/n! in the shared-exit terms.
        #[arg(long)]
        falling_factorial: bool,
        #[arg(long)]
        json: bool,
    },
    /// Sample random boards.
    Random {
        #[arg(long, short = 'n')]
        components: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Allow several components to share an exit (not uniform).
        #[arg(long, conflicts_with = "barrier")]
        shared_exits: bool,
        /// Plant a chute-barrier.
        #[arg(long)]
        barrier: bool,
        #[arg(long)]
        json: bool,
    },
    /// Monte-Carlo win probability.
    Simulate {
        #[command(flatten)]
        board: BoardArg,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        games: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_MOVES, value_parser = clap::value_parser!(u32).range(1..))]
        max_moves: u32,
        /// Keep playing inside closed sets until the move limit.
        #[arg(long)]
        no_shortcircuit: bool,
        #[arg(long)]
        json: bool,
    },
    /// Verdict proportions over random boards per component count.
    Census {
        #[arg(long, default_value_t = 0)]
        min_n: usize,
        #[arg(long, default_value_t = 30)]
        max_n: usize,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Simulate(#[from] SimError),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error("{0}")]
    Usage(String),
    #[error("output failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                2
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    writeln!(out, "{text}")?;
    Ok(())
}

fn cells(set: &classify::StateSet) -> String {
    let v: Vec<String> = set.iter().map(Cell::to_string).collect();
    format!("{{{}}}", v.join(","))
}

fn components(list: &[board::Component]) -> String {
    let v: Vec<String> = list.iter().map(ToString::to_string).collect();
    format!("[{}]", v.join(","))
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Validate { board, json } => validate(&board.load()?, json, out),
        Command::Name { board, json } => {
            let b = board.load()?;
            let name = board::format_name(&b);
            if json {
                emit_json(out, &NameReport { name, board: b.to_board_string() })
            } else {
                writeln!(out, "{name}")?;
                Ok(())
            }
        }
        Command::Classify { board, json } => classify_cmd(&board.load()?, json, out),
        Command::Structural { board, json } => {
            let report = structural::flowchart_classify(&board.load()?)?;
            if json {
                emit_json(out, &report)
            } else {
                write_structural(&report, out)
            }
        }
        Command::Matrix { board, certificate } => {
            let b = board.load()?;
            let m = TransitionMatrix::new(&b);
            match certificate_order(&b, certificate)? {
                Some(perm) => m.permute(&perm).write_ascii(out)?,
                None => m.write_ascii(out)?,
            }
            Ok(())
        }
        Command::Heatmap {
            board,
            output,
            certificate,
        } => {
            let b = board.load()?;
            let m = TransitionMatrix::new(&b);
            match certificate_order(&b, certificate)? {
                Some(perm) => markov::render_heatmap(&m.permute(&perm), &output)?,
                None => markov::render_heatmap(&m, &output)?,
            }
            writeln!(out, "wrote {}", output.display())?;
            Ok(())
        }
        Command::Stats { board, moves, json } => stats(&board.load()?, moves, json, out),
        Command::Count { max_n, json } => count(max_n, json, out),
        Command::Bounds {
            falling_factorial,
            json,
        } => bounds(falling_factorial, json, out),
        Command::Random {
            components,
            seed,
            count,
            shared_exits,
            barrier,
            json,
        } => random(components, seed, count, shared_exits, barrier, json, out),
        Command::Simulate {
            board,
            games,
            seed,
            max_moves,
            no_shortcircuit,
            json,
        } => {
            let cfg = SimConfig {
                seed,
                games,
                max_moves,
                short_circuit: !no_shortcircuit,
            };
            simulate_cmd(&board.load()?, &cfg, json, out)
        }
        Command::Census {
            min_n,
            max_n,
            samples,
            seed,
            json,
        } => {
            if min_n > max_n || max_n > enumerate::MAX_DISTINCT_COMPONENTS {
                return Err(CliError::Usage(format!(
                    "component range {min_n}..={max_n} must lie within 0..=49"
                )));
            }
            let report = census::census(&CensusConfig {
                min_components: min_n,
                max_components: max_n,
                samples,
                seed,
            })?;
            if json {
                emit_json(out, &report)
            } else {
                write_census(&report, out)
            }
        }
    }
}

#[derive(Serialize)]
struct NameReport {
    name: String,
    board: String,
}

#[derive(Serialize)]
struct ValidateReport {
    valid: bool,
    name: String,
    components: usize,
    chutes: usize,
    ladders: usize,
    normalized: bool,
    normalized_board: String,
    distinct_cells: bool,
}

fn validate(b: &Board, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let norm = b.normalize();
    let report = ValidateReport {
        valid: true,
        name: b.name(),
        components: b.len(),
        chutes: b.chutes().count(),
        ladders: b.ladders().count(),
        normalized: b.is_normalized(),
        normalized_board: norm.to_board_string(),
        distinct_cells: b.has_distinct_cells(),
    };
    if json {
        return emit_json(out, &report);
    }
    writeln!(out, "valid {}", report.name)?;
    writeln!(
        out,
        "components {} (chutes {}, ladders {})",
        report.components, report.chutes, report.ladders
    )?;
    if !report.normalized {
        writeln!(out, "normalized {}", norm.name())?;
    }
    Ok(())
}

fn classify_cmd(b: &Board, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let c = classify::classify_board(b)?;
    if json {
        return emit_json(out, &c);
    }
    writeln!(out, "{}", c.verdict)?;
    writeln!(out, "win probability {}", c.win_probability)?;
    let classes: Vec<String> = c.closed_classes.iter().map(cells).collect();
    writeln!(out, "closed classes {}", classes.join(" "))?;
    writeln!(out, "reachable states {}", c.reachable.len())?;
    if let Some(cert) = &c.certificate {
        writeln!(out, "certificate {:?} split {}", cert.form, cert.split)?;
    }
    Ok(())
}

fn certificate_order(b: &Board, wanted: bool) -> Result<Option<StatePermutation>, CliError> {
    if !wanted {
        return Ok(None);
    }
    Ok(classify::block_certificate(b)?.map(|c| c.permutation()))
}

fn write_structural(r: &StructuralReport, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "flowchart {} (step {})", r.flowchart_verdict, r.decided_at_step)?;
    writeln!(out, "ground truth {}", r.ground_truth)?;
    writeln!(out, "agrees {}", r.agrees_with_ground_truth)?;
    for b in &r.barriers {
        writeln!(
            out,
            "barrier {}..{}{} {}",
            b.first_entrance,
            b.last_entrance(),
            if b.merged { " merged" } else { "" },
            components(&b.chutes)
        )?;
    }
    for t in &r.trap_regions {
        let seq: Vec<String> = t.m_sequence.iter().map(u8::to_string).collect();
        writeln!(
            out,
            "region {} m-sequence [{}] {} escape {}",
            t.label(),
            seq.join(","),
            if t.is_closed() { "closed" } else { "open" },
            components(&t.escape_ladders)
        )?;
    }
    for s in &r.closed_sets {
        let passes: Vec<String> = s.ladder_passes.iter().map(|p| components(p)).collect();
        let bridges: Vec<String> = s.ladder_bridges.iter().map(|p| components(p)).collect();
        writeln!(
            out,
            "closed set {} passes [{}] bridges [{}] functional {:?} trappers {}",
            s.region,
            passes.join(","),
            bridges.join(","),
            s.functional_bridges,
            components(&s.trappers)
        )?;
    }
    Ok(())
}

/// Move counts at which length distributions are sampled.
pub const LENGTH_SAMPLE_POINTS: [usize; 8] = [10, 17, 25, 50, 100, 200, 500, 1000];

#[derive(Serialize)]
struct StatsReport {
    verdict: Verdict,
    win_probability: f64,
    expected_length: Option<f64>,
    length_cdf: Vec<CdfPoint>,
    stationary_supports: Vec<classify::StateSet>,
}

#[derive(Serialize)]
struct CdfPoint {
    moves: usize,
    probability: f64,
}

fn stats(b: &Board, moves: usize, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let c = classify::classify_board(b)?;
    let expected = match classify::expected_game_length(b) {
        Ok(v) => Some(v),
        Err(ClassifyError::NotUltimatelyWinnable(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let cdf = classify::game_length_distribution(b, moves);
    let mut points: Vec<usize> = LENGTH_SAMPLE_POINTS.iter().copied().filter(|&n| n < moves).collect();
    if moves > 0 {
        points.push(moves);
    }
    let report = StatsReport {
        verdict: c.verdict,
        win_probability: c.win_probability,
        expected_length: expected,
        length_cdf: points
            .into_iter()
            .map(|n| CdfPoint { moves: n, probability: cdf[n - 1] })
            .collect(),
        stationary_supports: classify::stationary_distributions(b)?
            .into_iter()
            .map(|s| s.support)
            .collect(),
    };
    if json {
        return emit_json(out, &report);
    }
    writeln!(out, "{}", report.verdict)?;
    writeln!(out, "win probability {}", report.win_probability)?;
    match report.expected_length {
        Some(v) => writeln!(out, "expected length {v}")?,
        None => writeln!(out, "expected length infinite")?,
    }
    for p in &report.length_cdf {
        writeln!(out, "P(won within {}) {}", p.moves, p.probability)?;
    }
    let supports: Vec<String> = report.stationary_supports.iter().map(cells).collect();
    writeln!(out, "stationary supports {}", supports.join(" "))?;
    Ok(())
}

#[derive(Serialize)]
struct CountRow {
    label: String,
    value: BigCount,
}

fn count_rows(max_n: usize) -> Result<Vec<CountRow>, CliError> {
    let mut rows = Vec::new();
    for n in 0..=max_n {
        rows.push(CountRow {
            label: format!("boards with {n} components"),
            value: enumerate::count_boards(n)?,
        });
    }
    let bound = enumerate::winnable_lower_bound();
    rows.push(CountRow { label: "total boards".into(), value: bound.total });
    rows.push(CountRow {
        label: "barrier placements".into(),
        value: enumerate::barrier_placements(),
    });
    rows.push(CountRow {
        label: "chute-barrier upper bound".into(),
        value: bound.barrier_bound,
    });
    rows.push(CountRow {
        label: "boards without a chute-barrier (at least)".into(),
        value: bound.without_barrier,
    });
    Ok(rows)
}

fn count(max_n: usize, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    if max_n > enumerate::MAX_DISTINCT_COMPONENTS {
        return Err(EnumerateError::OutOfRange(max_n).into());
    }
    let rows = count_rows(max_n)?;
    if json {
        return emit_json(out, &rows);
    }
    for r in &rows {
        writeln!(
            out,
            "{:<44} {:>18}  {}",
            r.label,
            r.value.scientific(DISPLAY_DIGITS),
            r.value.exact_string()
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsReport {
    all_boards: enumerate::WinnableBound,
    uncluttered: enumerate::WinnableBound,
    shared_exits: enumerate::SharedExitBounds,
}

fn bounds(falling: bool, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let factor = if falling {
        PermutationFactor::FallingFactorial
    } else {
        PermutationFactor::FactorialRatio
    };
    let report = BoundsReport {
        all_boards: enumerate::winnable_lower_bound(),
        uncluttered: enumerate::winnable_lower_bound_up_to(enumerate::UNCLUTTERED_MAX)?,
        shared_exits: enumerate::shared_exit_bounds_with(factor),
    };
    if json {
        return emit_json(out, &report);
    }
    for w in [&report.all_boards, &report.uncluttered] {
        writeln!(
            out,
            "N <= {:<2} total {}  barrier bound {}  winnable fraction >= {:.6}",
            w.max_components,
            w.total.scientific(DISPLAY_DIGITS),
            w.barrier_bound.scientific(DISPLAY_DIGITS),
            w.fraction_f64()
        )?;
    }
    writeln!(
        out,
        "shared exits ({:?}) lower {}  upper {}",
        report.shared_exits.factor,
        report.shared_exits.lower.scientific(DISPLAY_DIGITS),
        report.shared_exits.upper.scientific(DISPLAY_DIGITS)
    )?;
    Ok(())
}

#[derive(Serialize)]
struct RandomBoard {
    name: String,
    board: String,
}

fn random(
    n: usize,
    seed: u64,
    count: u64,
    shared_exits: bool,
    barrier: bool,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut boards = Vec::new();
    for i in 0..count {
        let mut rng = simulate::rng_from_seed(simulate::stream_seed(seed, i));
        let b = if barrier {
            simulate::random_barrier_board(n, &mut rng)?
        } else {
            simulate::random_board(n, shared_exits, &mut rng)?
        };
        boards.push(RandomBoard {
            name: b.name(),
            board: b.to_board_string(),
        });
    }
    if json {
        return emit_json(out, &boards);
    }
    for b in &boards {
        writeln!(out, "{}", b.board)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Outcomes {
    won: u64,
    trapped: u64,
    cutoff: u64,
}

#[derive(Serialize)]
struct LengthSample {
    moves: usize,
    empirical: f64,
    exact: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    board: String,
    config: SimConfig,
    estimate: f64,
    standard_error: f64,
    outcomes: Outcomes,
    mean_winning_length: Option<f64>,
    length_cdf: Vec<LengthSample>,
}

fn simulate_cmd(b: &Board, cfg: &SimConfig, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let est = simulate::estimate_win_probability(b, cfg)?;
    let points: Vec<usize> = LENGTH_SAMPLE_POINTS
        .iter()
        .copied()
        .filter(|&n| n <= cfg.max_moves as usize)
        .collect();
    let exact = classify::game_length_distribution(b, points.last().copied().unwrap_or(0));
    let report = SimulateReport {
        board: b.name(),
        config: *cfg,
        estimate: est.estimate,
        standard_error: est.standard_error,
        outcomes: Outcomes {
            won: est.won,
            trapped: est.trapped,
            cutoff: est.cutoff,
        },
        mean_winning_length: est.mean_winning_length(),
        length_cdf: points
            .iter()
            .map(|&n| LengthSample {
                moves: n,
                empirical: est.empirical_cdf(n),
                exact: exact[n - 1],
            })
            .collect(),
    };
    if json {
        return emit_json(out, &report);
    }
    writeln!(out, "estimate {} (standard error {})", report.estimate, report.standard_error)?;
    writeln!(
        out,
        "won {} trapped {} cutoff {} of {} games",
        report.outcomes.won, report.outcomes.trapped, report.outcomes.cutoff, cfg.games
    )?;
    if let Some(m) = report.mean_winning_length {
        writeln!(out, "mean winning length {m}")?;
    }
    for p in &report.length_cdf {
        writeln!(out, "within {:>4} moves  empirical {}  exact {}", p.moves, p.empirical, p.exact)?;
    }
    let exact_p = classify::absorption_probability(b, START)?;
    writeln!(out, "exact win probability {exact_p}")?;
    Ok(())
}

fn write_stratum(label: &str, s: &Stratum, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(
        out,
        "{label:>5} {:>8} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
        s.samples,
        s.ultimately_winnable_fraction,
        s.occasionally_winnable_fraction,
        s.unwinnable_fraction,
        s.barrier_fraction,
        s.agreement_rate
    )?;
    Ok(())
}

fn write_census(r: &CensusReport, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(
        out,
        "{:>5} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "N", "samples", "ultimate", "occasional", "unwinnable", "barrier", "agreement"
    )?;
    for s in &r.strata {
        let n = s.components.map(|n| n.to_string()).unwrap_or_default();
        write_stratum(&n, s, out)?;
    }
    write_stratum("all", &r.aggregate, out)?;
    for d in &r.disagreements {
        writeln!(
            out,
            "disagreement {} flowchart {} (step {}) ground truth {}",
            d.board, d.report.flowchart_verdict, d.report.decided_at_step, d.report.ground_truth
        )?;
    }
    Ok(())
}
