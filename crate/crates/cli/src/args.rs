use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "chansteer", version, about = "Channel steering: conversion, certification and quantification")]
pub struct Cli {
    /// Seed for every randomized generator.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Solver stopping tolerance (default 1e-10).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Write the result document here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a channel between Kraus, Choi and Stinespring form.
    Convert {
        #[arg(long, value_enum)]
        from: Repr,
        #[arg(long, value_enum)]
        to: Repr,
        #[arg(long)]
        input: PathBuf,
    },
    /// Generate a random object.
    Random {
        #[arg(value_enum)]
        kind: RandomKind,
        #[command(flatten)]
        dims: RandomDims,
    },
    /// Channel assemblage induced by an extension and Alice's POVMs.
    Assemblage {
        #[arg(long)]
        extension: PathBuf,
        /// Defaults to Pauli X and Z.
        #[arg(long)]
        povms: Option<PathBuf>,
    },
    /// Decide unsteerability and dump the model or the witness.
    Certify(AssemblageArgs),
    /// Steering robustness.
    Robustness(AssemblageArgs),
    /// Steerable weight.
    Weight(AssemblageArgs),
    /// Quantifier of an extension over channel inputs.
    ExtensionQuantifier {
        #[arg(long)]
        extension: PathBuf,
        #[arg(long)]
        povms: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "choi")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "robustness")]
        measure: MeasureArg,
    },
    /// Compare the channel route and the Choi-state route.
    VerifyTheorem1 {
        #[arg(long)]
        extension: PathBuf,
        #[arg(long)]
        povms: Option<PathBuf>,
    },
    /// Complementary channel of an extension.
    Complementary {
        #[arg(long)]
        extension: PathBuf,
        /// Also run the entanglement-breaking test.
        #[arg(long)]
        eb_check: bool,
    },
    /// Self-contained scenarios.
    Demo {
        #[arg(value_enum)]
        scenario: Scenario,
    },
    /// Reconstruct the channel assemblage of a simulated black box.
    Tomography {
        #[arg(long, value_enum)]
        mode: TomographyMode,
        #[arg(long)]
        extension: PathBuf,
        #[arg(long)]
        povms: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "standard")]
        probes: ProbeKind,
    },
    /// Quantifier over a parameter grid.
    Sweep {
        #[arg(long, value_enum)]
        param: ParamArg,
        /// `start:stop:count`, endpoints inclusive.
        #[arg(long)]
        range: String,
        #[arg(long, value_enum, default_value = "robustness")]
        measure: MeasureArg,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct AssemblageArgs {
    #[arg(long)]
    pub assemblage: PathBuf,
    /// The file holds a channel assemblage; its Choi states are used.
    #[arg(long)]
    pub channel_form: bool,
}

#[derive(Debug, Args)]
pub struct RandomDims {
    #[arg(long, default_value_t = 2)]
    pub d_in: usize,
    #[arg(long, default_value_t = 2)]
    pub d_out: usize,
    #[arg(long, default_value_t = 2)]
    pub d_a: usize,
    #[arg(long, default_value_t = 2)]
    pub d_b: usize,
    /// Kraus operators of a channel.
    #[arg(long, default_value_t = 2)]
    pub kraus: usize,
    /// Instrument members of an incoherent extension.
    #[arg(long, default_value_t = 2)]
    pub members: usize,
    #[arg(long, default_value_t = 2)]
    pub settings: usize,
    #[arg(long, default_value_t = 2)]
    pub outcomes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Repr {
    Kraus,
    Choi,
    Stinespring,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RandomKind {
    Channel,
    Kraus,
    Stinespring,
    Extension,
    Incoherent,
    Povms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Choi,
    Search,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Robustness,
    Weight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    FixedOutput,
    ExtremalKraus,
    Pointer,
    DephasingDilation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TomographyMode {
    Ancilla,
    Products,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    Standard,
    Orthogonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Gamma,
    Dephasing,
    Visibility,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Convert { .. } => "convert",
            Command::Random { .. } => "random",
            Command::Assemblage { .. } => "assemblage",
            Command::Certify(_) => "certify",
            Command::Robustness(_) => "robustness",
            Command::Weight(_) => "weight",
            Command::ExtensionQuantifier { .. } => "extension-quantifier",
            Command::VerifyTheorem1 { .. } => "verify-theorem1",
            Command::Complementary { .. } => "complementary",
            Command::Demo { .. } => "demo",
            Command::Tomography { .. } => "tomography",
            Command::Sweep { .. } => "sweep",
        }
    }
}
