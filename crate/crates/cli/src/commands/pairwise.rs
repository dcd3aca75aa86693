//! pairwise: two-class separability for every pair of values along one
//! decoding axis, plus the gap/separability rank correlation.

use crate::args::{AxisArg, PairwiseArgs};
use crate::util::{fit_backends, resolve_corpus};
use anyhow::Result;
use mcd_core::gen::SizeClass;
use mcd_core::train::{pairwise_ordering_study, Axis, TrainConfig};

pub fn run(args: &PairwiseArgs) -> Result<()> {
    let axis = match args.axis {
        AxisArg::K => Axis::K,
        AxisArg::P => Axis::P,
    };
    let (_, corpus) = resolve_corpus(
        args.corpus.corpus.as_deref(),
        &args.out,
        args.n_per_class,
        args.corpus.max_vocab,
    )?;
    let backends =
        fit_backends(&corpus, args.corpus.backend.kind(), &[SizeClass::Large], args.seed)?;
    let cfg = TrainConfig { seed: args.seed, ..TrainConfig::default() };
    let study = pairwise_ordering_study(
        axis,
        &args.values,
        &corpus,
        &backends,
        args.n_per_class,
        args.seed,
        &cfg,
        !args.keep_prompt,
    )?;

    std::fs::create_dir_all(&args.out)?;
    let mut body = serde_json::to_string_pretty(&study)?;
    body.push('\n');
    std::fs::write(args.out.join("pairwise.json"), body)?;
    std::fs::write(args.out.join("pairwise.txt"), study.render())?;
    println!("{}", serde_json::to_string(&study)?);
    Ok(())
}
