//! Regularly varying tails: truncated means against Karamata, quantiles,
//! and a de Bruijn conjugate.
//!
//! `cargo run --example regvar_tails`

use trimlaw::regvar::{de_bruijn_conjugate, SlowlyVarying, TailModel};

fn main() {
    let pareto = TailModel::pareto(0.5).unwrap();
    println!("Pareto alpha = 1/2");
    println!("  F^<-(0.99)        = {}", pareto.quantile(0.99).unwrap());
    println!("  int^100 x dF      = {}", pareto.truncated_mean(100.0).unwrap());

    let logged = TailModel::new(0.5, SlowlyVarying::LogPower(1.0), 100.0).unwrap();
    println!("\n1 - F(x) = ln x / sqrt(x), x >= 100");
    println!("{:>10} {:>16} {:>16} {:>10}", "u", "exact", "karamata", "ratio");
    for e in [3, 5, 8, 12, 16, 24] {
        let u = 10f64.powi(e);
        let exact = logged.truncated_mean(u).unwrap();
        let k = logged.karamata(u).unwrap();
        println!("{:>10.0e} {:>16.6e} {:>16.6e} {:>10.6}", u, exact, k, k / exact);
    }

    // (L^2)^# for L = ln x: the conjugate of a log power
    let l = SlowlyVarying::LogPower(1.0);
    let conj = de_bruijn_conjugate(&l).unwrap();
    println!("\nde Bruijn conjugate of ln x (method {:?})", conj.method());
    println!("{:>10} {:>14} {:>18}", "y", "L#(y)", "L(x)L#(xL(x)) - 1");
    for e in [2, 6, 20, 100] {
        let y = 10f64.powi(e);
        let v = conj.eval(y).unwrap();
        println!("{:>10.0e} {:>14.6e} {:>18.3e}", y, v, conj.residual(y).unwrap());
    }
}
