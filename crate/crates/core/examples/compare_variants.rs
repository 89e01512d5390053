//! Runs a small campaign over the k=1 corpus bugs with a reduced budget and
//! prints the metrics table.
//!
//!     cargo run --release --example compare_variants -- 5

use minirepair::campaign::{metrics_table, run_campaign, summarize, CampaignSpec, Variant};
use minirepair::search::SearchConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/bugs");
    let bugs = ["ledger-f1-1", "ledger-f1-2", "ledger-f1-3"].iter().map(|b| root.join(b)).collect();
    let spec = CampaignSpec {
        bugs,
        variants: vec![Variant::Arja, Variant::ArjaS, Variant::ArjaR, Variant::Kali],
        trials,
        seed: 7,
        workers: 0,
        search: SearchConfig {
            population: 20,
            generations: 20,
            ..SearchConfig::default()
        },
    };
    let records = run_campaign(&spec)?;
    print!("{}", metrics_table(&summarize(&records)));
    Ok(())
}
