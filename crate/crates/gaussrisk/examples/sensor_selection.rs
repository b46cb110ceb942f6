//! A-optimal sensor selection.
//!
//! Pick k observation rows from a candidate pool to minimize the Bayes risk
//! `tr(post_cov)`. Greedy picks use rank-one Woodbury downdates of the
//! covariance; on pools this small an exhaustive sweep certifies how close
//! greedy gets to the true optimum.
//!
//! ```bash
//! cargo run --example sensor_selection
//! ```

use gaussrisk::gaussian::GaussianMeasure;
use gaussrisk::oed::{exhaustive_select, greedy_select, trace_after_design, CandidatePool};
use gaussrisk::rng::DrawRng;
use nalgebra::DVector;

fn main() -> gaussrisk::Result<()> {
    println!("=== A-optimal selection: greedy vs exhaustive ===\n");

    let mut rng = DrawRng::new(8, 0);
    let rows = (0..6)
        .map(|_| {
            let row = DVector::from_fn(3, |_, _| rng.standard_normal());
            let var = 0.25 + rng.standard_normal().abs();
            (row, var)
        })
        .collect();
    let pool = CandidatePool::new(rows, None)?;
    let prior = GaussianMeasure::standard(3);

    println!("pool: 6 candidates in R^3, prior N(0, I), budget k = 2");
    println!("prior trace (empty design): {:.6}\n", trace_after_design(&pool, &prior, &[])?);

    let greedy = greedy_select(&pool, &prior, 2)?;
    println!("greedy picks: {:?} (labels {:?})", greedy.chosen, greedy.labels(&pool));
    println!("objective after each pick: {:?}\n", greedy.objective_trace);

    let exhaustive = exhaustive_select(&pool, &prior, 2)?;
    println!("exhaustive minimum over C(6,2) = 15 subsets: {:?}", exhaustive.chosen);
    println!("exhaustive objective: {:.6}", exhaustive.objective());
    println!("greedy objective:     {:.6}", greedy.objective());
    println!("optimality gap:       {:.3e}\n", greedy.objective() - exhaustive.objective());

    println!("every 2-subset, for reference:");
    for i in 0..6 {
        for j in (i + 1)..6 {
            let trace = trace_after_design(&pool, &prior, &[i, j])?;
            let marks = match (
                [i, j] == exhaustive.chosen.as_slice(),
                [i, j] == greedy.chosen.as_slice() || [j, i] == greedy.chosen.as_slice(),
            ) {
                (true, true) => "  <- optimal = greedy",
                (true, false) => "  <- optimal",
                (false, true) => "  <- greedy",
                _ => "",
            };
            println!("   {{{i}, {j}}}: {trace:.6}{marks}");
        }
    }

    Ok(())
}
