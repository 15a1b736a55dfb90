//! The `thimac` command: parse, validate, check events, simulate, render.
//!
//! Everything is driven through [`run`], which writes to the given streams
//! and returns the process exit status, so tests can call it in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thimac::diagnostic::{has_errors, Diagnostic};
use thimac::dsl::{self, ModelDocument};
use thimac::emit::{self, DotView, EventLogRow, GroupPattern, TableStyle};
use thimac::event::{check_chronology, check_events, expand, FlowOrder};
use thimac::time::TimePoint;
use thimac::validate::{transit_routes, validate_with, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "thimac",
    version,
    about = "Thinging-machine models: validate, simulate, render"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Checks {
    /// Treat warnings as errors.
    #[arg(long)]
    strict: bool,
    /// Require transfer-to-transfer pairing across thimacs.
    #[arg(long)]
    strict_pairing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the static model's structural rules.
    Validate {
        path: PathBuf,
        #[command(flatten)]
        checks: Checks,
    },
    /// Check events and chronology; print the derived event order.
    Events {
        path: PathBuf,
        #[command(flatten)]
        checks: Checks,
    },
    /// Run the chronology and render the result.
    Simulate {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "ledger")]
        format: Format,
        /// Entity pattern for history tables, e.g. `Table.Row` or `*.Row`.
        #[arg(long)]
        group: Option<String>,
        /// Only the history rows holding at this time.
        #[arg(long)]
        at: Option<String>,
        #[arg(long, value_enum, default_value = "tsv")]
        table_style: Style,
        /// Add a `Nothing` row on the day before an event that follows the
        /// previous one within this many days.
        #[arg(long)]
        fill_days: Option<u64>,
        #[command(flatten)]
        checks: Checks,
    },
    /// Print the canonical form.
    Print {
        path: PathBuf,
        /// Exit with status 1 if the file is not in canonical form.
        #[arg(long)]
        check: bool,
    },
    /// Render the model as a DOT graph.
    Export {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "static")]
        view: View,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Ledger,
    EventLog,
    History,
    DotStatic,
    DotEvents,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Style {
    Tsv,
    Aligned,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum View {
    Static,
    Events,
}

/// Early exit carrying a status; messages are already written.
struct Exit(i32);

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn fail(&mut self, code: i32, message: impl std::fmt::Display) -> Exit {
        let _ = writeln!(self.err, "thimac: {message}");
        Exit(code)
    }

    /// Prints diagnostics and decides whether they stop the run.
    fn report(&mut self, path: &Path, diags: &[Diagnostic], strict: bool) -> Result<(), Exit> {
        for d in diags {
            let _ = writeln!(self.err, "{}: {d}", path.display());
        }
        if has_errors(diags) || (strict && !diags.is_empty()) {
            Err(Exit(EXIT_DIAGNOSTICS))
        } else {
            Ok(())
        }
    }
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io { out, err };
    match execute(cli.command, &mut io) {
        Ok(()) => EXIT_OK,
        Err(Exit(code)) => code,
    }
}

fn load(io: &mut Io, path: &Path) -> Result<(String, ModelDocument), Exit> {
    let text = std::fs::read_to_string(path).map_err(|e| io.fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    match dsl::parse(&text) {
        Ok(doc) => Ok((text, doc)),
        Err(errors) => {
            for e in errors {
                let _ = writeln!(io.err, "{}:{e}", path.display());
            }
            Err(Exit(EXIT_DIAGNOSTICS))
        }
    }
}

fn options(checks: &Checks) -> ValidateOptions {
    ValidateOptions {
        strict_pairing: checks.strict_pairing,
    }
}

/// Static rules, then event rules, then the chronology.
fn check_all(io: &mut Io, path: &Path, doc: &ModelDocument, checks: &Checks) -> Result<(), Exit> {
    io.report(path, &validate_with(&doc.model, options(checks)), checks.strict)?;
    io.report(path, &check_events(&doc.model, &doc.events), checks.strict)?;
    io.report(
        path,
        &check_chronology(&doc.model, &doc.events, &doc.chronology),
        checks.strict,
    )
}

fn emit_out(io: &mut Io, text: &str) -> Result<(), Exit> {
    io.out
        .write_all(text.as_bytes())
        .map_err(|e| io.fail(EXIT_USAGE, format!("cannot write output: {e}")))
}

fn execute(command: Command, io: &mut Io) -> Result<(), Exit> {
    match command {
        Command::Validate { path, checks } => {
            let (_, doc) = load(io, &path)?;
            io.report(&path, &validate_with(&doc.model, options(&checks)), checks.strict)
        }
        Command::Events { path, checks } => {
            let (_, doc) = load(io, &path)?;
            check_all(io, &path, &doc, &checks)?;
            let order = FlowOrder::derive(&doc.model, &doc.events);
            let mut text = String::new();
            for (a, b) in order.reduction() {
                text.push_str(&format!("{a} < {b}\n"));
            }
            for route in transit_routes(&doc.model) {
                let actions: Vec<String> = route.actions.iter().map(ToString::to_string).collect();
                text.push_str(&format!("transit {}: {}\n", route.thimac, actions.join(" -> ")));
            }
            emit_out(io, &text)
        }
        Command::Simulate {
            path,
            format,
            group,
            at,
            table_style,
            fill_days,
            checks,
        } => {
            let style = match table_style {
                Style::Tsv => TableStyle::Tsv,
                Style::Aligned => TableStyle::Aligned,
            };
            let group: Option<GroupPattern> = match (&group, format) {
                (None, Format::History) => return Err(io.fail(EXIT_USAGE, "--format history needs --group")),
                (Some(g), _) => Some(g.parse().map_err(|e| io.fail(EXIT_USAGE, e))?),
                (None, _) => None,
            };
            let at = match &at {
                Some(t) => Some(TimePoint::parse(t).map_err(|e| io.fail(EXIT_USAGE, e))?),
                None => None,
            };
            let (_, doc) = load(io, &path)?;
            match format {
                Format::DotStatic => return emit_out(io, &emit::emit_dot(&doc, DotView::Static)),
                Format::DotEvents => {
                    check_all(io, &path, &doc, &checks)?;
                    return emit_out(io, &emit::emit_dot(&doc, DotView::Events));
                }
                _ => {}
            }
            if doc.chronology.is_empty() {
                return Err(io.fail(EXIT_USAGE, format!("{}: no chronology to simulate", path.display())));
            }
            check_all(io, &path, &doc, &checks)?;
            let occurrences = expand(&doc.chronology);
            let (trace, ledger) = thimac::sim::run(&doc.model, &doc.events, &occurrences)
                .map_err(|e| io.fail(EXIT_DIAGNOSTICS, format!("{}: {e}", path.display())))?;
            let text = match format {
                Format::Ledger => ledger.dump(),
                Format::EventLog => {
                    let mut rows = emit::emit_event_log(&trace);
                    if let Some(n) = fill_days {
                        rows = emit::fill_days(&rows, n);
                    }
                    EventLogRow::table(&rows).render(style)
                }
                Format::History => {
                    let group = group.expect("checked above");
                    let history = emit::emit_history_table(&ledger, &group)
                        .map_err(|e| io.fail(EXIT_DIAGNOSTICS, format!("{}: {e}", path.display())))?;
                    match at {
                        Some(t) => emit::snapshot(&history, &t).1.render(style),
                        None => history.table().render(style),
                    }
                }
                Format::DotStatic | Format::DotEvents => unreachable!("handled above"),
            };
            emit_out(io, &text)
        }
        Command::Print { path, check } => {
            let (text, doc) = load(io, &path)?;
            let canonical = dsl::print(&doc);
            if check {
                if text.replace("\r\n", "\n") == canonical {
                    Ok(())
                } else {
                    Err(io.fail(EXIT_DIAGNOSTICS, format!("{}: not in canonical form", path.display())))
                }
            } else {
                emit_out(io, &canonical)
            }
        }
        Command::Export { path, view } => {
            let (_, doc) = load(io, &path)?;
            let view = match view {
                View::Static => DotView::Static,
                View::Events => DotView::Events,
            };
            emit_out(io, &emit::emit_dot(&doc, view))
        }
    }
}
