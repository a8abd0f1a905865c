//! Command line front end. Data goes to stdout, diagnostics to stderr.
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{generate_synthetic_with, SynthSpec};
use crate::model::{DatasetSnapshot, FactorId, SiteId, TimePoint};
use crate::present::{self, Scheme};
use crate::query::{self, ChecklistCriterion, Condition, LookupMode, Predicate, RankKey, SortOrder, WhereQuery};
use crate::service::{serve, ServiceState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

const PREDICATE_HELP: &str = "Predicate grammar: `factor op number` with op one of < <= = >= >, \
or `factor between low high` (inclusive). Examples: \"population>=2500\", \"supermarket_count = 0\".";

#[derive(Parser, Debug)]
#[command(name = "sitelens", version, about = "Explore site-selection data over an administrative hierarchy", after_help = PREDICATE_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate a bundle; list every issue found.
    Validate { bundle: PathBuf },
    /// Serve the HTTP API for a bundle.
    Serve {
        bundle: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Find sites at a level that satisfy predicates, optionally ranked.
    #[command(after_help = PREDICATE_HELP)]
    Where {
        bundle: PathBuf,
        #[arg(long)]
        level: String,
        /// Site id or name that results must descend from.
        #[arg(long)]
        scope: Option<String>,
        #[arg(long)]
        t: Option<TimePoint>,
        /// Repeatable; all predicates must hold.
        #[arg(long = "predicate")]
        predicates: Vec<Predicate>,
        /// `factor:asc` or `factor:desc`; repeatable, earlier keys first.
        #[arg(long = "rank-by", value_parser = parse_rank_key)]
        rank_by: Vec<RankKey>,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Find the time intervals in which a site's series satisfies a condition.
    When {
        bundle: PathBuf,
        #[arg(long)]
        site: String,
        #[arg(long)]
        factor: String,
        /// Condition such as "<7" or "between 1 5".
        #[arg(long, allow_hyphen_values = true)]
        predicate: Condition,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Look up factor values of one site.
    What {
        bundle: PathBuf,
        #[arg(long)]
        site: String,
        /// Comma-separated factor ids.
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<FactorId>,
        #[arg(long)]
        t: Option<TimePoint>,
        /// Use the latest observation at or before `t`.
        #[arg(long)]
        latest: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Compare sites on factors; each factor ranks by its direction.
    Compare {
        bundle: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        sites: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<FactorId>,
        #[arg(long)]
        t: Option<TimePoint>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Score sites with weighted +/o/- criteria read from a JSON file.
    Checklist {
        bundle: PathBuf,
        #[arg(long)]
        criteria: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        sites: Vec<String>,
        #[arg(long)]
        t: Option<TimePoint>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Render the children of a site as an SVG choropleth map.
    Choropleth {
        bundle: PathBuf,
        #[arg(long)]
        parent: String,
        #[arg(long)]
        factor: String,
        #[arg(long)]
        t: Option<TimePoint>,
        #[arg(long, default_value_t = Scheme::Quantile)]
        scheme: Scheme,
        #[arg(long, default_value_t = present::DEFAULT_CLASSES)]
        k: usize,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded synthetic bundle.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sites per level, root first.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 4, 16, 64])]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 6)]
        factors: usize,
        #[arg(long, default_value_t = 12)]
        timepoints: usize,
        #[arg(long, default_value_t = 0.0)]
        missing_rate: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_rank_key(s: &str) -> Result<RankKey, String> {
    let (factor, order) = s.rsplit_once(':').unwrap_or((s, "desc"));
    let order = match order {
        "asc" => SortOrder::Asc,
        "desc" => SortOrder::Desc,
        other => return Err(format!("unknown sort order `{other}`, expected asc or desc")),
    };
    if factor.is_empty() {
        return Err("missing factor".into());
    }
    Ok(RankKey(factor.into(), order))
}

/// Runs with the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::Validation(report) = &e {
                for issue in &report.issues {
                    let _ = writeln!(err, "  {issue}");
                }
            }
            EXIT_DATA
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn time(snap: &DatasetSnapshot, t: Option<TimePoint>) -> Result<TimePoint> {
    t.or(snap.default_time()).ok_or_else(|| Error::InvalidArgument("no --t given and the bundle has no default time".into()))
}

fn resolve_sites(snap: &DatasetSnapshot, keys: &[String]) -> Result<Vec<SiteId>> {
    keys.iter().map(|k| snap.resolve_site(k).map(|s| s.id.clone())).collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Header plus rows in the requested format; `json` is emitted separately.
fn write_rows(out: &mut dyn Write, format: Format, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    match format {
        Format::Csv | Format::Json => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            for row in rows {
                w.write_record(row).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            }
            w.flush().map_err(io)?;
        }
        Format::Table => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for row in rows {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.chars().count());
                }
            }
            for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
                let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                writeln!(out, "{}", line.join("  ").trim_end()).map_err(io)?;
            }
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    writeln!(out, "{text}").map_err(io)
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Validate { bundle } => {
            let snap = crate::load_bundle(&bundle)?;
            for w in snap.warnings() {
                writeln!(err, "  {w}").map_err(io)?;
            }
            writeln!(
                out,
                "ok: {} sites, {} factors, {} values, {} warnings (stamp {})",
                snap.sites().len(),
                snap.factors().len(),
                snap.value_count(),
                snap.warnings().len(),
                snap.provenance().stamp
            )
            .map_err(io)
        }
        Command::Serve { bundle, bind } => {
            let state = ServiceState::load(&bundle)?;
            let runtime = tokio::runtime::Runtime::new().map_err(io)?;
            runtime.block_on(async {
                let handle = serve(state, &bind).await.map_err(|e| Error::io(&bind, e))?;
                writeln!(err, "listening on http://{}", handle.addr).map_err(io)?;
                handle.wait().await.map_err(|e| Error::io(&bind, e))
            })
        }
        Command::Where { bundle, level, scope, t, predicates, rank_by, limit, format } => {
            let snap = crate::load_bundle(&bundle)?;
            let scope = scope.map(|s| snap.resolve_site(&s).map(|s| s.id.clone())).transpose()?;
            let query = WhereQuery { level, scope, t: time(&snap, t)?, predicates, rank_by, limit };
            let matches = query::search_where(&snap, &query)?;
            if let Format::Json = format {
                return write_json(out, &matches);
            }
            let mut factors: Vec<&FactorId> = Vec::new();
            for f in query.rank_by.iter().map(|k| &k.0).chain(query.predicates.iter().map(|p| &p.factor_id)) {
                if !factors.contains(&f) {
                    factors.push(f);
                }
            }
            let mut header = vec!["name".to_owned()];
            header.extend(factors.iter().map(|f| f.to_string()));
            header.push("site_id".into());
            let rows: Vec<Vec<String>> = matches
                .iter()
                .map(|m| {
                    let mut row = vec![m.name.clone()];
                    row.extend(factors.iter().map(|f| cell(m.value_of(f.as_str()))));
                    row.push(m.site_id.to_string());
                    row
                })
                .collect();
            write_rows(out, format, &header, &rows)
        }
        Command::When { bundle, site, factor, predicate, format } => {
            let snap = crate::load_bundle(&bundle)?;
            let site = snap.resolve_site(&site)?.id.clone();
            let intervals = query::search_when(&snap, site.as_str(), &factor, &predicate)?;
            match format {
                Format::Json => write_json(out, &intervals),
                Format::Csv => {
                    let rows: Vec<_> = intervals.iter().map(|i| vec![i.from.to_string(), i.to.to_string()]).collect();
                    write_rows(out, format, &["from".into(), "to".into()], &rows)
                }
                Format::Table => {
                    for i in &intervals {
                        writeln!(out, "{}..{}", i.from, i.to).map_err(io)?;
                    }
                    Ok(())
                }
            }
        }
        Command::What { bundle, site, factors, t, latest, format } => {
            let snap = crate::load_bundle(&bundle)?;
            let site = snap.resolve_site(&site)?.id.clone();
            let mode = if latest { LookupMode::LatestAtOrBefore } else { LookupMode::Exact };
            let readings = query::lookup_what(&snap, site.as_str(), &factors, time(&snap, t)?, mode)?;
            if let Format::Json = format {
                return write_json(out, &readings);
            }
            let header: Vec<String> = ["factor", "t", "value", "coverage"].map(String::from).to_vec();
            let rows: Vec<_> = readings
                .iter()
                .map(|r| {
                    vec![
                        r.factor_id.to_string(),
                        r.t.map(|t| t.to_string()).unwrap_or_default(),
                        cell(r.value.value),
                        r.value.coverage.to_string(),
                    ]
                })
                .collect();
            write_rows(out, format, &header, &rows)
        }
        Command::Compare { bundle, sites, factors, t, format } => {
            let snap = crate::load_bundle(&bundle)?;
            let sites = resolve_sites(&snap, &sites)?;
            let cmp = query::compare_sites(&snap, &sites, &factors, time(&snap, t)?)?;
            for w in &cmp.warnings {
                writeln!(err, "warning: {w}").map_err(io)?;
            }
            if let Format::Json = format {
                return write_json(out, &cmp);
            }
            let mut header = vec!["site_id".to_owned()];
            header.extend(factors.iter().map(|f| f.to_string()));
            let mut rows: Vec<Vec<String>> = sites
                .iter()
                .zip(&cmp.matrix)
                .map(|(s, row)| std::iter::once(s.to_string()).chain(row.iter().map(|v| cell(v.value))).collect())
                .collect();
            let mut best = vec!["best".to_owned()];
            best.extend(cmp.rankings.iter().map(|r| r.order.first().map(ToString::to_string).unwrap_or_default()));
            rows.push(best);
            write_rows(out, format, &header, &rows)
        }
        Command::Checklist { bundle, criteria, sites, t, format } => {
            let snap = crate::load_bundle(&bundle)?;
            let text = std::fs::read_to_string(&criteria).map_err(|e| Error::io(&criteria, e))?;
            let criteria: Vec<ChecklistCriterion> =
                serde_json::from_str(&text).map_err(|e| Error::parse(criteria.display().to_string(), e.line(), e.to_string()))?;
            let sites = resolve_sites(&snap, &sites)?;
            let table = query::checklist_score(&snap, &sites, &criteria, time(&snap, t)?)?;
            if let Format::Json = format {
                return write_json(out, &table);
            }
            let mut header = vec!["rank".to_owned(), "site_id".to_owned()];
            header.extend(table.factor_ids.iter().map(|f| f.to_string()));
            header.push("total".into());
            let rows: Vec<_> = table
                .rows
                .iter()
                .map(|r| {
                    let mut row = vec![r.rank.to_string(), r.site_id.to_string()];
                    row.extend(r.cells.iter().map(|c| c.rating.symbol().to_owned()));
                    row.push(r.total.to_string());
                    row
                })
                .collect();
            write_rows(out, format, &header, &rows)
        }
        Command::Choropleth { bundle, parent, factor, t, scheme, k, width, height, out: path } => {
            let snap = crate::load_bundle(&bundle)?;
            let parent = snap.resolve_site(&parent)?.id.clone();
            let layer = present::build_choropleth(&snap, parent.as_str(), &factor, time(&snap, t)?, scheme, k)?;
            let svg = present::render_choropleth_svg(&layer, width, height);
            std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
            let missing = layer.sites.iter().filter(|s| s.geometry.is_none()).count();
            if missing > 0 {
                writeln!(err, "warning: {missing} site(s) without geometry were skipped").map_err(io)?;
            }
            writeln!(out, "wrote {} ({} sites, {} classes)", path.display(), layer.sites.len(), k).map_err(io)
        }
        Command::Synth { seed, levels, factors, timepoints, missing_rate, out: dir } => {
            if levels.is_empty() || levels.contains(&0) || factors == 0 || timepoints == 0 {
                return Err(Error::InvalidArgument("levels, factors and timepoints must all be positive".into()));
            }
            if !(0.0..=1.0).contains(&missing_rate) {
                return Err(Error::InvalidArgument("missing rate must lie in [0, 1]".into()));
            }
            let mut spec = SynthSpec::new(levels, factors, timepoints, seed);
            spec.missing_rate = missing_rate;
            let bundle = generate_synthetic_with(&spec);
            let manifest = bundle.write(&dir)?;
            writeln!(out, "wrote {} (stamp {})", manifest.display(), bundle.digest()).map_err(io)
        }
    }
}
