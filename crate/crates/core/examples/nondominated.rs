//! Sorts a handful of (patch size, failure rate) pairs into fronts and shows
//! the crowding distance within each.
//!
//!     cargo run --example nondominated

use minirepair::search::{crowding_distance, fast_nondominated_sort, Objectives};

fn main() {
    let pop = [
        Objectives::new(1, 0.50),
        Objectives::new(2, 0.25),
        Objectives::new(3, 0.0),
        Objectives::new(2, 0.50),
        Objectives::new(4, 0.0),
        Objectives::new(1, 0.75),
        Objectives::new(3, 0.25),
        Objectives::INVALID,
    ];
    for (rank, front) in fast_nondominated_sort(&pop).iter().enumerate() {
        let d = crowding_distance(&pop, front);
        println!("front {rank}");
        for (&i, d) in front.iter().zip(d) {
            let [f1, f2] = pop[i].values();
            println!("  #{i}  size {f1:>3}  failing {f2:.2}  crowding {d:.3}");
        }
    }
}
