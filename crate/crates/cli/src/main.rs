use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tkd_cli::commands::{self, Failure, Format, Output, PageOptions, QueryOptions, SpecGenOptions};
use tkd_cli::{Op, Workspace};
use tkd_core::Direction;

#[derive(Parser)]
#[command(
    name = "tkd",
    version,
    about = "Tabular design documents: templates, tables, catalogs and specifications"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Write the result here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a structure file and list its diagnostics.
    Validate { tks: PathBuf },
    /// Create a table module from a structure file.
    New {
        tks: PathBuf,
        /// Blank data records to add.
        #[arg(long, default_value_t = 0)]
        records: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Draw a table (.tkm, or .tks for the bare header).
    Render {
        file: PathBuf,
        #[arg(long, default_value = "text")]
        fmt: Format,
        #[command(flatten)]
        out: OutArg,
    },
    /// Split a table into chunks and draw them side by side.
    Paginate {
        file: PathBuf,
        /// Chunk height in mm.
        #[arg(long)]
        height: Option<f64>,
        #[arg(long)]
        repeat_header: bool,
        /// Add a graph-number row starting at N.
        #[arg(long, value_name = "N")]
        numbers: Option<u32>,
        #[arg(long, value_parser = parse_direction)]
        direction: Option<Direction>,
        #[arg(long, default_value = "text")]
        fmt: Format,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build a specification from drawing property files.
    SpecGen {
        /// Drawing files, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        scope: Vec<PathBuf>,
        /// Element types to collect (default: all).
        #[arg(long, value_delimiter = ',')]
        types: Vec<String>,
        #[arg(long)]
        template: PathBuf,
        /// Merge rows that differ only in quantity.
        #[arg(long)]
        merge: bool,
        /// Sort by these graphs, comma separated.
        #[arg(long, value_delimiter = ',')]
        sort: Vec<String>,
        #[command(flatten)]
        out: OutArg,
    },
    #[command(subcommand)]
    Catalog(CatalogCommand),
    #[command(subcommand)]
    Buffer(BufferCommand),
    /// Apply one edit to a module.
    Edit {
        file: PathBuf,
        #[command(subcommand)]
        edit: EditCommand,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "TKD_DATA_DIR")]
        data_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// List the items of an object class that satisfy the constraints.
    Query {
        #[arg(long)]
        class: String,
        /// Working pressure, e.g. 1.6МПа.
        #[arg(long = "p")]
        pressure: Option<String>,
        /// Working temperature, e.g. 80C.
        #[arg(long = "t")]
        temperature: Option<String>,
        #[arg(long)]
        dn: Option<u32>,
        #[arg(long, env = "TKD_CATALOG_DIR", default_value = "catalogs")]
        dir: PathBuf,
    },
    /// Fill the row of a subject cell from a catalog item.
    Fill {
        file: PathBuf,
        /// Cell path, e.g. 1/4.
        #[arg(long)]
        subject: String,
        /// Item as printed by `query`, e.g. 1:6.
        #[arg(long)]
        item: String,
        #[arg(long, env = "TKD_CATALOG_DIR", default_value = "catalogs")]
        dir: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum BufferCommand {
    /// Copy data rows START..END into a .tkb buffer.
    Copy {
        file: PathBuf,
        #[arg(long)]
        rows: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Paste a buffer after data row AT (0 = top).
    Paste {
        buffer: PathBuf,
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        at: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum EditCommand {
    /// Merge rows equal except for quantity.
    Merge {
        #[arg(long)]
        rows: String,
    },
    /// Sort rows by graphs.
    Sort {
        #[arg(long, value_delimiter = ',', required = true)]
        by: Vec<String>,
    },
    /// Move the common head of a graph's texts into a heading row.
    Extract {
        #[arg(long)]
        rows: String,
        #[arg(long)]
        graph: String,
    },
    /// Wrap cell texts to their graph widths.
    Pack {
        #[arg(long)]
        rows: String,
    },
    /// Any edit as JSON, e.g. {"op":"insert_record","after":0}.
    Json { op: String },
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    match s {
        "left" => Ok(Direction::Left),
        "right" => Ok(Direction::Right),
        _ => Err(format!("unknown direction {s:?} (left or right)")),
    }
}

fn emit(result: Result<Output, Failure>, out: Option<&Path>) -> Result<(), Failure> {
    let output = result?;
    for note in &output.notes {
        eprintln!("{note}");
    }
    match out {
        Some(path) => std::fs::write(path, &output.body)
            .map_err(|e| Failure::Domain(format!("{}: {e}", path.display()))),
        None => {
            print!("{}", output.body);
            Ok(())
        }
    }
}

fn edit_op(edit: EditCommand) -> Result<Op, Failure> {
    Ok(match edit {
        EditCommand::Merge { rows } => Op::Merge {
            rows: commands::parse_rows(&rows)?,
        },
        EditCommand::Sort { by } => Op::Sort { graphs: by },
        EditCommand::Extract { rows, graph } => Op::Extract {
            rows: commands::parse_rows(&rows)?,
            graph,
        },
        EditCommand::Pack { rows } => Op::Pack {
            rows: commands::parse_rows(&rows)?,
        },
        EditCommand::Json { op } => {
            serde_json::from_str(&op).map_err(|e| Failure::Usage(format!("bad edit: {e}")))?
        }
    })
}

fn serve(port: u16, data_dir: Option<PathBuf>) -> Result<(), Failure> {
    let workspace = match &data_dir {
        Some(dir) => Workspace::open(dir).map_err(|e| Failure::Domain(e.to_string()))?,
        None => Workspace::new(),
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Domain(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", port))
            .await
            .map_err(|e| Failure::Domain(format!("port {port}: {e}")))?;
        eprintln!(
            "listening on {}",
            listener
                .local_addr()
                .map_err(|e| Failure::Domain(e.to_string()))?
        );
        axum::serve(listener, tkd_cli::http::router(workspace))
            .await
            .map_err(|e| Failure::Domain(e.to_string()))
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { tks } => emit(commands::validate(&tks), None),
        Command::New { tks, records, out } => {
            emit(commands::new_module(&tks, records), out.output.as_deref())
        }
        Command::Render { file, fmt, out } => {
            emit(commands::render(&file, fmt), out.output.as_deref())
        }
        Command::Paginate {
            file,
            height,
            repeat_header,
            numbers,
            direction,
            fmt,
            out,
        } => {
            let opts = PageOptions {
                height,
                repeat_header,
                numbers,
                direction,
            };
            emit(
                commands::paginate_file(&file, &opts, fmt),
                out.output.as_deref(),
            )
        }
        Command::SpecGen {
            scope,
            types,
            template,
            merge,
            sort,
            out,
        } => {
            let opts = SpecGenOptions {
                scope,
                types: commands::parse_types(&types)?,
                template,
                merge,
                sort,
            };
            emit(commands::spec_gen(&opts), out.output.as_deref())
        }
        Command::Catalog(CatalogCommand::Query {
            class,
            pressure,
            temperature,
            dn,
            dir,
        }) => {
            let opts = QueryOptions {
                class,
                pressure,
                temperature,
                dn,
            };
            emit(commands::catalog_query(&dir, &opts), None)
        }
        Command::Catalog(CatalogCommand::Fill {
            file,
            subject,
            item,
            dir,
            out,
        }) => {
            let subject = commands::parse_path(&subject)?;
            let item = commands::parse_item(&item)?;
            emit(
                commands::catalog_fill(&file, &dir, subject, item),
                out.output.as_deref(),
            )
        }
        Command::Buffer(BufferCommand::Copy { file, rows, out }) => emit(
            commands::buffer_copy(&file, commands::parse_rows(&rows)?),
            out.output.as_deref(),
        ),
        Command::Buffer(BufferCommand::Paste {
            buffer,
            file,
            at,
            out,
        }) => emit(
            commands::buffer_paste(&buffer, &file, at),
            out.output.as_deref(),
        ),
        Command::Edit { file, edit, out } => emit(
            commands::edit(&file, &edit_op(edit)?),
            out.output.as_deref(),
        ),
        Command::Serve { port, data_dir } => serve(port, data_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tkd: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
