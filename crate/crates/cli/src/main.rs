use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use rowlink::annotate::{csv_writer, write_csv_rows, write_jsonl, StructureRecord};
use rowlink::eval::{self, EvalOptions};
use rowlink::exec::with_threads;
use rowlink::kg::ingest_ntriples;
use rowlink::table::{parse_table, TableFormat};
use rowlink::{Annotator, Execution, KnowledgeGraph, PipelineConfig};

#[derive(Parser)]
#[command(name = "rowlink", version, about = "Annotate table rows with knowledge-graph entities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a lookup index from an N-Triples dump (.nt or .nt.gz).
    Index { dump: PathBuf, out: PathBuf },
    /// Annotate tables (CSV or JSON-rows files, or directories of them).
    Annotate {
        #[arg(long)]
        index: PathBuf,
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        /// Output directory.
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        limit_tables: Option<usize>,
        /// Write only this format (default: both).
        #[arg(long, value_enum)]
        output_format: Option<OutputFormat>,
    },
    /// Score predictions against a gold standard.
    Evaluate {
        /// Gold CSV, or a directory of per-table T2D gold files.
        #[arg(long)]
        gold: PathBuf,
        /// Annotation output (.jsonl or .csv); for `core`, a structure sidecar.
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Entities)]
        mode: Mode,
        /// Index used to drop gold IRIs missing from the graph.
        #[arg(long)]
        index: Option<PathBuf>,
        /// Skip gold rows marked "none" instead of counting predictions there as false positives.
        #[arg(long)]
        ignore_none_rows: bool,
        /// Also write the report as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Entities,
    Core,
}

/// Raised for bad user input that got past argument parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Index { dump, out } => cmd_index(&dump, &out),
        Command::Annotate { index, tables, out, config, threads, limit_tables, output_format } => {
            cmd_annotate(&index, &tables, &out, config.as_deref(), threads, limit_tables, output_format)
        }
        Command::Evaluate { gold, predictions, mode, index, ignore_none_rows, json } => {
            cmd_evaluate(&gold, &predictions, mode, index.as_deref(), ignore_none_rows, json.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_index(dump: &Path, out: &Path) -> Result<()> {
    let started = Instant::now();
    let (kg, report) = ingest_ntriples(dump)?;
    for s in &report.first_skipped {
        log::warn!("skipped line {}: {}", s.line, s.reason);
    }
    if kg.entity_count() == 0 {
        log::warn!("{} produced an index with no entities", dump.display());
    }
    kg.save(out)?;
    println!("lines      {}", report.lines);
    println!("triples    {}", kg.triple_count());
    println!("duplicates {}", report.duplicates);
    println!("skipped    {}", report.skipped);
    println!("entities   {}", kg.entity_count());
    println!("labels     {}", kg.label_count());
    println!("build time {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn table_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("cannot list {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv" || x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else if input.is_file() {
            files.push(input.clone());
        } else {
            bail!(UsageError(format!("no such table file or directory: {}", input.display())));
        }
    }
    Ok(files)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn cmd_annotate(
    index: &Path,
    tables: &[PathBuf],
    out: &Path,
    config: Option<&Path>,
    threads: usize,
    limit: Option<usize>,
    format: Option<OutputFormat>,
) -> Result<()> {
    let config = match config {
        Some(p) => PipelineConfig::load(p).map_err(|e| UsageError(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    let mut files = table_files(tables)?;
    if let Some(n) = limit {
        files.truncate(n);
    }
    let started = Instant::now();
    let kg = KnowledgeGraph::load(index)?;
    log::info!("loaded index: {} entities in {:.2}s", kg.entity_count(), started.elapsed().as_secs_f64());

    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut jsonl = match format {
        None | Some(OutputFormat::Jsonl) => Some(create(&out.join("annotations.jsonl"))?),
        _ => None,
    };
    let mut csv = match format {
        None | Some(OutputFormat::Csv) => Some(csv_writer(create(&out.join("annotations.csv"))?)?),
        _ => None,
    };
    let mut sidecar = create(&out.join("structure.jsonl"))?;

    let annotator = Annotator::new(&kg, &config, Execution::Parallel);
    let (annotated, failed) = with_threads(threads, || -> Result<(usize, usize)> {
        let (mut annotated, mut failed) = (0usize, 0usize);
        for path in &files {
            let table = match parse_table(path, TableFormat::from_path(path)) {
                Ok(t) => t,
                Err(e) => {
                    log::warn!("skipping {}: {e}", path.display());
                    failed += 1;
                    let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    let record = StructureRecord {
                        table_id: id,
                        status: "ParseError",
                        header_row: None,
                        core_column: None,
                        column_dtypes: Vec::new(),
                        uniqueness_scores: Vec::new(),
                        annotated_rows: 0,
                        error: Some(e.to_string()),
                    };
                    write_jsonl(&mut sidecar, &[record])?;
                    continue;
                }
            };
            let outcome = annotator.annotate(&table);
            if outcome.structure.is_err() {
                failed += 1;
            }
            annotated += outcome.rows.len();
            write_jsonl(&mut sidecar, &[StructureRecord::from(&outcome)])?;
            if let Some(w) = jsonl.as_mut() {
                write_jsonl(w, &outcome.rows)?;
            }
            if let Some(w) = csv.as_mut() {
                write_csv_rows(w, &outcome.rows)?;
            }
        }
        Ok((annotated, failed))
    })?;
    if let Some(mut w) = jsonl {
        w.flush()?;
    }
    if let Some(mut w) = csv {
        w.flush()?;
    }
    sidecar.flush()?;
    println!(
        "{} tables, {} rows written, {} tables skipped, {:.2}s",
        files.len(),
        annotated,
        failed,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_evaluate(
    gold: &Path,
    predictions: &Path,
    mode: Mode,
    index: Option<&Path>,
    ignore_none_rows: bool,
    json: Option<&Path>,
) -> Result<()> {
    let report = match mode {
        Mode::Entities => {
            let mut records = if gold.is_dir() { eval::read_t2d_gold_dir(gold)? } else { eval::read_gold_csv(gold)? };
            if let Some(index) = index {
                let kg = KnowledgeGraph::load(index)?;
                eval::mark_validity(&mut records, &kg);
            }
            let preds = eval::read_predictions(predictions)?;
            let scores = eval::score_entities(&records, &preds, EvalOptions { ignore_none_rows })?;
            print!("{}", scores.summary());
            serde_json::to_string_pretty(&scores)?
        }
        Mode::Core => {
            let gold = eval::read_core_gold_csv(gold)?;
            let preds = eval::read_core_predictions(predictions)?;
            let scores = eval::score_core_attribute(&gold, &preds);
            print!("{}", scores.summary());
            serde_json::to_string_pretty(&scores)?
        }
    };
    if let Some(path) = json {
        fs::write(path, report + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
