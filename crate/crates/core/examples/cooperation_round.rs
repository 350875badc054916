//! One cooperation round with random inter-user outages, built with each
//! selection rule.

use gancc::codes::Ensemble;
use gancc::construction::{run_round, DpegTieBreak, LinkModel, RoundConfig, SelectionRule};
use gancc::seed::{subsystem_rng, trial_seed, Subsystem};

fn main() -> gancc::Result<()> {
    let ts = trial_seed(2024, 0);
    for rule in [SelectionRule::Random, SelectionRule::Cwc, SelectionRule::Dpeg] {
        let cfg = RoundConfig {
            m: 6,
            degree: 3,
            ensemble: Ensemble::LtLdpc,
            rule,
            link: LinkModel::Erasure { eps: 0.2 },
            tie_break: DpegTieBreak::LowestIndex,
        };
        // Same topology stream for every rule, so only the selections differ.
        let round = run_round(
            &cfg,
            &mut subsystem_rng(ts, Subsystem::Topology),
            &mut subsystem_rng(ts, Subsystem::Selection),
        )?;
        println!("{rule}: {} links, column weights {:?}", round.topology.links().len(), round.base.column_weights());
        for (row, h) in round.base.rows().iter().zip(&round.headers) {
            println!("  {row:?}  header 0x{h:x}");
        }
        for w in &round.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
