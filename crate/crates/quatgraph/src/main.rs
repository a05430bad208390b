use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "quatgraph",
    about = "Quaternion graph neural networks and a GCN baseline on CPU",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured task and write metrics JSON plus a checkpoint.
    Train {
        /// JSON run configuration (see presets/).
        config: PathBuf,
        /// Dotted-path overrides, e.g. --set train.lr=0.001
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Worker threads for fold/split/run parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the exact number of trainable parameters of the model.
    CountParams {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Export vectorized node states of one layer as CSV.
    ExportEmbeddings {
        config: PathBuf,
        /// Checkpoint written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Layer index, 1-based.
        #[arg(long, default_value_t = 1)]
        layer: usize,
        /// Output CSV path (default: <output_dir>/embeddings_layer<L>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Verify tape gradients against finite differences on a miniature
    /// instance of the configured model.
    Gradcheck {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Train { config, mut set, jobs } => {
            if let Some(jobs) = jobs {
                set.push(format!("train.jobs={jobs}"));
            }
            quatgraph::cli::cmd_train(&config, &set)
        }
        Command::CountParams { config, set } => quatgraph::cli::cmd_count_params(&config, &set),
        Command::ExportEmbeddings {
            config,
            checkpoint,
            layer,
            out,
            set,
        } => quatgraph::cli::cmd_export_embeddings(
            &config,
            &set,
            &checkpoint,
            layer,
            out.as_deref(),
        ),
        Command::Gradcheck { config, set } => quatgraph::cli::cmd_gradcheck(&config, &set),
    };
    std::process::exit(code);
}
