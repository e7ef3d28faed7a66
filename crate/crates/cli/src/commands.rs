use std::path::Path;

use chansteer::channels::{
    choi_from_kraus, complementary, eb_check, incoherent_extension, kraus_from_choi, marginal, random_channel,
    random_extension, random_instrument, random_isometry, random_kraus, random_povm, random_state, seeded_rng,
    stinespring_from_kraus, Channel, ChannelExtension, KrausSet, Party, StinespringIsometry,
};
use chansteer::par::Execution;
use chansteer::steering::{
    channel_quantifier_report, choi_state_assemblage, induced_channel_assemblage, steerable_weight,
    steering_robustness, test_unsteerable, verify_theorem1, ChannelAssemblage, InputMode, MeasurementAssemblage,
    Quantity, StateAssemblage,
};
use chansteer::sweep::{linspace, run_sweep, SweepParam};
use chansteer::tomography::{reconstruct_ancilla, reconstruct_products, ProbeSet, SimulatedBox};
use serde_json::{json, Value};

use crate::args::{
    AssemblageArgs, Command, MeasureArg, ModeArg, ParamArg, ProbeKind, RandomDims, RandomKind, Repr, TomographyMode,
};
use crate::demos;
use crate::doc::{load, to_value, CliError, CliResult, ErrorKind};

pub fn run(command: &Command, seed: u64) -> CliResult<Value> {
    match command {
        Command::Convert { from, to, input } => convert(*from, *to, input),
        Command::Random { kind, dims } => random(*kind, dims, seed),
        Command::Assemblage { extension, povms } => {
            let e: ChannelExtension = load(extension)?;
            let ma = measurements(povms.as_deref())?;
            let ca = induced_channel_assemblage(&e, &ma)?;
            Ok(json!({ "consistency_defect": ca.consistency_defect(), "object": to_value(&ca) }))
        }
        Command::Certify(a) => Ok(to_value(&test_unsteerable(&state_assemblage(a)?)?)),
        Command::Robustness(a) => Ok(to_value(&steering_robustness(&state_assemblage(a)?)?)),
        Command::Weight(a) => Ok(to_value(&steerable_weight(&state_assemblage(a)?)?)),
        Command::ExtensionQuantifier { extension, povms, mode, measure } => {
            let e: ChannelExtension = load(extension)?;
            let ma = measurements(povms.as_deref())?;
            let mode = match mode {
                ModeArg::Choi => InputMode::Choi,
                ModeArg::Search => InputMode::Search,
            };
            Ok(to_value(&channel_quantifier_report(&e, &ma, quantity(*measure), mode, Execution::Parallel)?))
        }
        Command::VerifyTheorem1 { extension, povms } => {
            let e: ChannelExtension = load(extension)?;
            Ok(to_value(&verify_theorem1(&e, &measurements(povms.as_deref())?)?))
        }
        Command::Complementary { extension, eb_check: check } => {
            let e: ChannelExtension = load(extension)?;
            let c = complementary(&e);
            let mut out = json!({ "object": to_value(&c) });
            if *check {
                out["eb_status"] = to_value(&eb_check(&c));
            }
            Ok(out)
        }
        Command::Demo { scenario } => demos::run(*scenario, seed),
        Command::Tomography { mode, extension, povms, probes } => tomography(*mode, extension, povms.as_deref(), *probes),
        Command::Sweep { param, range, measure, csv } => sweep(*param, range, *measure, csv.as_deref()),
    }
}

/// Pauli X and Z when no file is given.
fn measurements(path: Option<&Path>) -> CliResult<MeasurementAssemblage> {
    path.map_or_else(|| Ok(MeasurementAssemblage::pauli_xz()), load)
}

fn state_assemblage(a: &AssemblageArgs) -> CliResult<StateAssemblage> {
    if a.channel_form {
        Ok(choi_state_assemblage(&load::<ChannelAssemblage>(&a.assemblage)?))
    } else {
        load(&a.assemblage)
    }
}

pub fn quantity(m: MeasureArg) -> Quantity {
    match m {
        MeasureArg::Robustness => Quantity::Robustness,
        MeasureArg::Weight => Quantity::Weight,
    }
}

fn to_channel(repr: Repr, v: Value) -> CliResult<Channel> {
    Ok(match repr {
        Repr::Choi => serde_json::from_value(v)?,
        Repr::Kraus => choi_from_kraus(&serde_json::from_value::<KrausSet>(v)?)?,
        Repr::Stinespring => marginal(&serde_json::from_value::<StinespringIsometry>(v)?.extension(), Party::B),
    })
}

fn from_channel(repr: Repr, c: &Channel) -> CliResult<Value> {
    Ok(match repr {
        Repr::Choi => to_value(c),
        Repr::Kraus => to_value(&kraus_from_choi(c)?),
        Repr::Stinespring => to_value(&stinespring_from_kraus(&kraus_from_choi(c)?)?),
    })
}

/// Converts, converts back, and reports the Frobenius drift of the Choi operator.
fn convert(from: Repr, to: Repr, input: &Path) -> CliResult<Value> {
    let source = to_channel(from, load::<Value>(input)?)?;
    let object = from_channel(to, &source)?;
    let back = to_channel(to, object.clone())?;
    if back.choi().rows() != source.choi().rows() {
        return Err(CliError::validation("conversion preserves dimensions", "round trip changed the Choi size"));
    }
    Ok(json!({ "drift": back.choi().distance(source.choi()), "object": object }))
}

fn random(kind: RandomKind, d: &RandomDims, seed: u64) -> CliResult<Value> {
    let mut rng = seeded_rng(seed);
    let object = match kind {
        RandomKind::Channel => to_value(&random_channel(d.d_in, d.d_out, d.kraus, &mut rng)?),
        RandomKind::Kraus => to_value(&random_kraus(d.d_in, d.d_out, d.kraus, &mut rng)?),
        RandomKind::Stinespring => {
            let v = random_isometry(d.d_in, d.d_a * d.d_b, &mut rng)?;
            to_value(&StinespringIsometry::new(v, d.d_a, d.d_b)?)
        }
        RandomKind::Extension => to_value(&random_extension(d.d_in, d.d_a, d.d_b, seed)?),
        RandomKind::Incoherent => {
            let inst = random_instrument(d.d_in, d.d_b, d.members, &mut rng)?;
            let flags: Vec<_> = (0..d.members).map(|_| random_state(d.d_a, &mut rng)).collect();
            to_value(&incoherent_extension(&inst, &flags)?)
        }
        RandomKind::Povms => {
            let povms = (0..d.settings)
                .map(|_| random_povm(d.d_a, d.outcomes, &mut rng))
                .collect::<chansteer::Result<Vec<_>>>()?;
            to_value(&MeasurementAssemblage::new(povms)?)
        }
    };
    Ok(json!({ "object": object }))
}

fn tomography(mode: TomographyMode, extension: &Path, povms: Option<&Path>, probes: ProbeKind) -> CliResult<Value> {
    let e: ChannelExtension = load(extension)?;
    let ma = measurements(povms)?;
    let direct = induced_channel_assemblage(&e, &ma)?;
    let bb = SimulatedBox::new(e.clone(), ma.clone())?;
    let (x, a) = (ma.settings(), ma.outcomes());
    let (ca, rank) = match mode {
        TomographyMode::Ancilla => (reconstruct_ancilla(&bb, x, a)?, None),
        TomographyMode::Products => {
            let set = match probes {
                ProbeKind::Standard => ProbeSet::standard(e.d_c()),
                ProbeKind::Orthogonal => ProbeSet::orthogonal(e.d_c()),
            };
            (reconstruct_products(&bb, &set, x, a)?, Some(set.rank()))
        }
    };
    let mut out = json!({ "deviation_from_direct": ca.distance(&direct), "object": to_value(&ca) });
    if let Some(r) = rank {
        out["probe_rank"] = json!(r);
    }
    Ok(out)
}

fn parse_range(s: &str) -> CliResult<(f64, f64, usize)> {
    let bad = || CliError::usage(format!("range must be start:stop:count, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn sweep(param: ParamArg, range: &str, measure: MeasureArg, csv_path: Option<&Path>) -> CliResult<Value> {
    let (a, b, n) = parse_range(range)?;
    let param = match param {
        ParamArg::Gamma => SweepParam::Gamma,
        ParamArg::Dephasing => SweepParam::Dephasing,
        ParamArg::Visibility => SweepParam::Visibility,
    };
    let rows = run_sweep(param, quantity(measure), &linspace(a, b, n), Execution::Parallel)?;
    if let Some(path) = csv_path {
        let io = |e: csv::Error| CliError::new(ErrorKind::Io, format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        for row in &rows {
            w.serialize(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::new(ErrorKind::Io, format!("{}: {e}", path.display())))?;
    }
    Ok(json!({ "param": to_value(&param), "measure": to_value(&quantity(measure)), "rows": to_value(&rows) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_grammar() {
        assert_eq!(parse_range("0:1:5").unwrap(), (0.0, 1.0, 5));
        assert_eq!(parse_range(" 0.2 : 0.4 : 3").unwrap(), (0.2, 0.4, 3));
        for bad in ["0:1", "a:1:2", "0:1:0", "0:1:2:3", "0:inf:2"] {
            assert_eq!(parse_range(bad).unwrap_err().kind, ErrorKind::Usage, "{bad}");
        }
    }
}
