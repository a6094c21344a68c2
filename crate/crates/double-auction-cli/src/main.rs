//! Command line front end: run call auctions, audit trade books against
//! the reference matchings, generate seeded test instances, and probe
//! the demand/supply volume bound.
//!
//! Exit codes: 0 success or compliant, 1 violation (or a failed bound
//! probe), 2 usage, I/O, or parse trouble, 3 inadmissible order book.

use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use double_auction::{
    check_tradebook, demand, mm, preprocess, read_events_csv, read_orders_csv, read_trades_csv,
    supply, um, write_orders_csv, write_report, write_trades_csv, Matching, Mode, Order,
    OrderDomain, PreprocessIssue, Side, Verdict,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "double-auction", version)]
#[command(about = "Call-auction matching and trade-book compliance tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a call auction over an order book and write the trades.
    Auction(AuctionArgs),
    /// Audit a trade book against the reference matching.
    Check(CheckArgs),
    /// Generate a seeded random admissible order book.
    Gen(GenArgs),
    /// Print demand, supply, and the volume bound at one price.
    Bound(BoundArgs),
}

/// The order book inputs: either both sides as separate files, or one
/// raw event feed that replays into the final books.
#[derive(Args)]
struct BookArgs {
    /// Bid book CSV (id,timestamp,quantity,price).
    #[arg(long)]
    bids: Option<PathBuf>,
    /// Ask book CSV (id,timestamp,quantity,price).
    #[arg(long)]
    asks: Option<PathBuf>,
    /// Raw order-event CSV (id,timestamp,quantity,price,side,action).
    #[arg(long)]
    raw: Option<PathBuf>,
}

#[derive(Args)]
struct AuctionArgs {
    #[command(flatten)]
    book: BookArgs,
    /// Matching rule for the auction.
    #[arg(long, value_enum, default_value_t = CliMode::Uniform)]
    mode: CliMode,
    /// Trades CSV to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    book: BookArgs,
    /// Trade book CSV to audit.
    #[arg(long)]
    trades: Option<PathBuf>,
    /// Reference rule the exchange claims to follow.
    #[arg(long, value_enum, default_value_t = CliMode::Uniform)]
    mode: CliMode,
    /// Structured report file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Batch directory holding STEM.bid/STEM.ask/STEM.trade triples;
    /// one verdict line per STEM, reports written as STEM.report.
    #[arg(long)]
    dir: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// RNG seed; the same seed always yields the same books.
    #[arg(long)]
    seed: u64,
    /// Orders per side.
    #[arg(long, default_value_t = 100)]
    orders: u64,
    /// Smallest limit price drawn.
    #[arg(long, default_value_t = 1)]
    price_min: u64,
    /// Largest limit price drawn.
    #[arg(long, default_value_t = 1000)]
    price_max: u64,
    /// Largest quantity drawn (smallest is 1).
    #[arg(long, default_value_t = 20)]
    qty_max: u64,
    /// Output stem; writes STEM.bid and STEM.ask.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    book: BookArgs,
    /// Price to probe.
    #[arg(long)]
    price: u64,
    /// Optional trade book; adds its volume and a PASS/FAIL line.
    #[arg(long)]
    trades: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Uniform,
    Maximum,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Mode {
        match m {
            CliMode::Uniform => Mode::Uniform,
            CliMode::Maximum => Mode::Maximum,
        }
    }
}

/// A failure that ends the run: exit code plus a message for stderr.
struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn parse(message: impl Into<String>) -> Fail {
        Fail { code: 2, message: message.into() }
    }

    fn inadmissible(message: impl Into<String>) -> Fail {
        Fail { code: 3, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Auction(args) => cmd_auction(&args),
        Command::Check(args) => cmd_check(&args),
        Command::Gen(args) => cmd_gen(&args),
        Command::Bound(args) => cmd_bound(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(fail) => {
            eprintln!("error: {}", fail.message);
            ExitCode::from(fail.code)
        }
    }
}

fn open(path: &Path) -> Result<File, Fail> {
    File::open(path).map_err(|e| Fail::parse(format!("{}: {e}", path.display())))
}

fn read_book(path: &Path, side: Side) -> Result<Vec<Order>, Fail> {
    read_orders_csv(open(path)?, side)
        .map_err(|e| Fail::parse(format!("{}: {e}", path.display())))
}

fn describe(issue: &PreprocessIssue) -> String {
    match issue {
        PreprocessIssue::UnknownId { side, id, action, timestamp } => {
            format!("{action:?} for unknown {side} id {id} at {timestamp}")
        }
        PreprocessIssue::DuplicateNew { side, id, timestamp } => {
            format!("repeated NEW for {side} id {id} at {timestamp}")
        }
        PreprocessIssue::LateUpdate { side, id, timestamp } => {
            format!("update of {side} id {id} at the feed's final timestamp {timestamp}")
        }
        PreprocessIssue::ZeroQuantity { side, id, timestamp } => {
            format!("zero-quantity event for {side} id {id} at {timestamp}")
        }
    }
}

/// Loads the final order book from `--bids`/`--asks` or from `--raw`,
/// enforcing admissibility. Replay oddities go to stderr as notes.
fn load_domain(book: &BookArgs) -> Result<OrderDomain, Fail> {
    let domain = match (&book.bids, &book.asks, &book.raw) {
        (Some(b), Some(a), None) => {
            OrderDomain::new(read_book(b, Side::Bid)?, read_book(a, Side::Ask)?)
        }
        (None, None, Some(r)) => {
            let events = read_events_csv(open(r)?)
                .map_err(|e| Fail::parse(format!("{}: {e}", r.display())))?;
            let outcome = preprocess(&events);
            for issue in &outcome.issues {
                eprintln!("note: {}", describe(issue));
            }
            outcome.domain
        }
        _ => {
            return Err(Fail::parse(
                "provide either --bids and --asks together, or --raw alone",
            ))
        }
    };
    let report = domain.check_admissible();
    if !report.is_admissible() {
        return Err(Fail::inadmissible(format!("inadmissible order book: {report}")));
    }
    Ok(domain)
}

/// Writes through a temporary file in the target directory so readers
/// never observe a half-written file.
fn atomic_write(path: &Path, render: impl FnOnce(&mut Vec<u8>) -> Result<(), Fail>) -> Result<(), Fail> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Fail::parse(format!("{}: {e}", path.display())))?;
    tmp.write_all(&buf)
        .and_then(|()| tmp.as_file_mut().sync_all())
        .map_err(|e| Fail::parse(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| Fail::parse(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn cmd_auction(args: &AuctionArgs) -> Result<u8, Fail> {
    let domain = load_domain(&args.book)?;
    let matching = match args.mode {
        CliMode::Uniform => um(&domain),
        CliMode::Maximum => mm(&domain),
    }
    .map_err(|e| Fail::inadmissible(e.to_string()))?;
    atomic_write(&args.out, |buf| {
        write_trades_csv(buf, &matching).map_err(|e| Fail::parse(e.to_string()))
    })?;
    if args.mode == CliMode::Uniform {
        match matching.transactions().first() {
            Some(t) => println!("clearing_price={}", t.price()),
            None => println!("clearing_price=none"),
        }
    }
    Ok(0)
}

fn read_trades(path: &Path) -> Result<Matching, Fail> {
    read_trades_csv(open(path)?).map_err(|e| Fail::parse(format!("{}: {e}", path.display())))
}

fn check_one(
    domain: &OrderDomain,
    trades: &Path,
    mode: Mode,
    report_out: Option<&Path>,
) -> Result<Verdict, Fail> {
    let book = read_trades(trades)?;
    let report = check_tradebook(domain, &book, mode)
        .map_err(|e| Fail::inadmissible(e.to_string()))?;
    if let Some(path) = report_out {
        atomic_write(path, |buf| {
            write_report(buf, &report).map_err(|e| Fail::parse(e.to_string()))
        })?;
    }
    Ok(report.verdict)
}

fn cmd_check(args: &CheckArgs) -> Result<u8, Fail> {
    if let Some(dir) = &args.dir {
        if args.book.bids.is_some()
            || args.book.asks.is_some()
            || args.book.raw.is_some()
            || args.trades.is_some()
            || args.out.is_some()
        {
            return Err(Fail::parse("--dir replaces the per-file flags"));
        }
        return cmd_check_dir(dir, args.mode.into());
    }
    let Some(trades) = &args.trades else {
        return Err(Fail::parse("--trades is required outside --dir mode"));
    };
    let domain = load_domain(&args.book)?;
    let verdict = check_one(&domain, trades, args.mode.into(), args.out.as_deref())?;
    let line = match verdict {
        Verdict::Compliant => "Matching does not violate the guidelines",
        Verdict::Violation => "Violation detected!",
    };
    println!("{line}");
    Ok(if verdict == Verdict::Compliant { 0 } else { 1 })
}

/// Batch layout: every STEM.trade in the directory names one instrument
/// whose books live in STEM.bid and STEM.ask.
fn cmd_check_dir(dir: &Path, mode: Mode) -> Result<u8, Fail> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Fail::parse(format!("{}: {e}", dir.display())))?;
    let mut stems: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let path = e.path();
            let stem = path.file_stem()?.to_str()?.to_owned();
            (path.extension()? == "trade").then_some(stem)
        })
        .collect();
    stems.sort();
    let mut worst = 0u8;
    for stem in &stems {
        let book = BookArgs {
            bids: Some(dir.join(format!("{stem}.bid"))),
            asks: Some(dir.join(format!("{stem}.ask"))),
            raw: None,
        };
        let domain = load_domain(&book)?;
        let verdict = check_one(
            &domain,
            &dir.join(format!("{stem}.trade")),
            mode,
            Some(&dir.join(format!("{stem}.report"))),
        )?;
        let line = match verdict {
            Verdict::Compliant => "Matching does not violate the guidelines",
            Verdict::Violation => "Violation detected!",
        };
        println!("{stem}: {line}");
        if verdict == Verdict::Violation {
            worst = worst.max(1);
        }
    }
    Ok(worst)
}

fn cmd_gen(args: &GenArgs) -> Result<u8, Fail> {
    if args.price_min > args.price_max {
        return Err(Fail::parse("--price-min must not exceed --price-max"));
    }
    if args.qty_max == 0 {
        return Err(Fail::parse("--qty-max must be at least 1"));
    }
    let n = args.orders;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut stamps: Vec<u64> = (1..=2 * n).collect();
    stamps.shuffle(&mut rng);
    let mut next = stamps.into_iter();
    let side = |rng: &mut ChaCha8Rng, next: &mut dyn Iterator<Item = u64>| {
        (1..=n)
            .map(|id| {
                Order::new(
                    id,
                    next.next().unwrap(),
                    rng.gen_range(1..=args.qty_max),
                    rng.gen_range(args.price_min..=args.price_max),
                )
                .expect("quantities start at 1")
            })
            .collect::<Vec<_>>()
    };
    let bids = side(&mut rng, &mut next);
    let asks = side(&mut rng, &mut next);

    let stem = args.out.display();
    for (orders, path) in [(&bids, format!("{stem}.bid")), (&asks, format!("{stem}.ask"))] {
        atomic_write(Path::new(&path), |buf| {
            write_orders_csv(buf, orders).map_err(|e| Fail::parse(e.to_string()))
        })?;
    }
    Ok(0)
}

fn cmd_bound(args: &BoundArgs) -> Result<u8, Fail> {
    let domain = load_domain(&args.book)?;
    let p = u128::from(args.price);
    let d = demand(&domain.bids, p);
    let s = supply(&domain.asks, p);
    println!("demand={d}");
    println!("supply={s}");
    println!("bound={}", d + s);
    if let Some(trades) = &args.trades {
        let book = read_trades(trades)?;
        let vol = book.vol();
        let ok = vol <= d + s;
        println!("volume={vol}");
        println!("bound_check={}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            return Ok(1);
        }
    }
    Ok(0)
}
