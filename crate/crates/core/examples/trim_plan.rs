//! Trimming plans from truncation levels and the hypotheses they satisfy.
//!
//! `cargo run --example trim_plan`

use trimlaw::regvar::{Law, SlowlyVarying, TailModel};
use trimlaw::sequences::{
    condition_diagnostics, general_trimming_plan, plan_csv, regvar_norming, PsiFunction, ThresholdSchedule,
};
use trimlaw::trimming::CheckpointGrid;

fn main() {
    let grid = CheckpointGrid::geometric(10_000, 10.0, 100_000_000).unwrap();
    let tail = TailModel::new(0.5, SlowlyVarying::LogPower(1.0), 100.0).unwrap();
    let law = Law::RegVar(tail.clone());
    let psi = PsiFunction::Square;

    let f = ThresholdSchedule::Power { coef: 1.0, exponent: 1.5 }.on(&law, &grid).unwrap();
    let plan = general_trimming_plan(&law, &f, &grid, 0.1, 4.0, &psi).unwrap();
    let report = condition_diagnostics(&plan, Some(&tail), &psi);
    print!("{}", plan_csv(&plan, &report));
    println!("verdicts: general {}, regvar {}, b_n {}", report.general.verdict, report.regvar.verdict, report.trim.verdict);

    // with b_n = a_n the two normings differ only by the Karamata error
    let a: Vec<usize> = plan.rows.iter().map(|r| r.a.round() as usize).collect();
    let d = regvar_norming(0.5, tail.slowly_varying(), &a, &grid).unwrap();
    println!("\nd_n from the trimmed-law formula with b_n = a_n, against n int^f x dF:");
    for (row, dn) in plan.rows.iter().zip(d) {
        println!("  n = {:>10}  {:.6e} / {:.6e} = {:.4}", row.n, dn, row.d, dn / row.d);
    }

    let gk = general_trimming_plan(&Law::GaussKuzmin, &ThresholdSchedule::Power { coef: 1.0, exponent: 0.9 }.on(&Law::GaussKuzmin, &grid).unwrap(), &grid, 0.1, 2.0, &psi).unwrap();
    println!("\nCF digits with f_n = n^0.9: b_n = {:?}", gk.trims());
}
