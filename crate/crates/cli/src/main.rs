//! `armsight` — synthetic data generation, cascade training, evaluation and
//! inference for robot-arm perception from a single color image.

mod commands;
mod rundir;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "armsight",
    about = "Robot-arm localisation and 3D joint estimation from a color image",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (images, masks, labels, manifest).
    Gen(commands::gen::GenArgs),
    /// Train the robot-body mask network (stage 1).
    TrainSeg(commands::train::TrainSegArgs),
    /// Train the 3D joint-coordinate network (stage 2).
    TrainJoints(commands::train::TrainJointsArgs),
    /// Evaluate checkpoints on a dataset's test split.
    Eval(commands::eval::EvalArgs),
    /// Run the full cascade on a single image.
    Infer(commands::infer::InferArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen::run(args),
        Command::TrainSeg(args) => commands::train::run_seg(args),
        Command::TrainJoints(args) => commands::train::run_joints(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Infer(args) => commands::infer::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
