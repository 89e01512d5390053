//! Draws random genomes for a bug, decodes them into edits and prints the
//! edit script and diff of the first one that changes the program.
//!
//!     cargo run --example decode_patch -- corpus/bugs/orders-f2-1 7

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use minirepair::genome::{apply_edits, decode, edit_script, unified_diff};
use minirepair::pipeline::Prepared;
use minirepair::search::{random_patch, GeneSpace, SearchConfig};
use minirepair::seeder::SeededBug;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir: PathBuf = args.next().ok_or("usage: decode_patch <bug-dir> [seed]")?.into();
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let bug = SeededBug::load(&dir)?;
    let prep = Prepared::new(bug.program, bug.suite, &SearchConfig::default())?;
    let space = GeneSpace::from_points(&prep.points);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for draw in 1..=100 {
        let patch = random_patch(&space, 0.3, &mut rng);
        let edits = decode(&patch, &prep.points, true);
        let raw = decode(&patch, &prep.points, false);
        if edits.is_empty() {
            continue;
        }
        println!("draw {draw}: {} bits set, {} edits ({} before disabling)", patch.size(), edits.len(), raw.len());
        println!("b = {:?}", patch.b.iter().map(|&b| u8::from(b)).collect::<Vec<_>>());
        println!("u = {:?}\nv = {:?}\n", patch.u, patch.v);
        print!("{}", edit_script(&prep.program, &edits));
        println!();
        print!("{}", unified_diff(&prep.program, &apply_edits(&prep.program, &edits)));
        return Ok(());
    }
    Err("no draw produced an edit".into())
}
