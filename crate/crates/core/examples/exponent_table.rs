//! Prints the exact exponent catalog: dyadic losses for several orders, the
//! power-law formula with its validity predicates, and the alternating
//! family.
//!
//! ```text
//! cargo run --example exponent_table
//! ```

use traplab::catalog::{alternating_prediction, dyadic_prediction, powerlaw_prediction, ExponentPrediction};

pub fn run_example(orders: &[u32], ks: &[u64]) -> anyhow::Result<Vec<(String, ExponentPrediction)>> {
    let mut rows = Vec::new();
    for &m in orders {
        rows.push((format!("dyadic m={m}"), dyadic_prediction(m, 0.05)?));
        for &k in ks {
            rows.push((format!("powerlaw m={m} k={k}"), powerlaw_prediction(m, k)?));
        }
    }
    rows.push(("alternating".to_string(), alternating_prediction()));
    println!("{:<24} {:>10} {:>10}  validity", "family", "resolvent", "smoothing");
    for (name, p) in &rows {
        let failed: Vec<&str> = p.validity.iter().filter(|v| !v.holds).map(|v| v.name.as_str()).collect();
        println!(
            "{name:<24} {:>10} {:>10}  {}",
            p.resolvent_loss.to_string(),
            p.smoothing_loss.to_string(),
            if failed.is_empty() { "ok".to_string() } else { format!("fails {}", failed.join(", ")) }
        );
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example(&[3, 5, 7], &[7, 9, 19, 1000])?;
    Ok(())
}
