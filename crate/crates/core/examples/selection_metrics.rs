//! True and false positive rates of top-k selections, and the exact AUC of
//! a risk score.

use fedboost::eval::{auc, selection_metrics};
use fedboost::simgen::TruthVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut beta = vec![0.0; 100];
    beta[0] = 1.0;
    beta[1] = 1.0;
    let truth = TruthVector { beta };

    let a = vec![0, 1];
    let b: Vec<usize> = std::iter::once(0).chain(50..59).collect();
    let m = selection_metrics(&[a, b], &truth, 10)?;
    println!("two replicates: tpr {:.2} fpr {:.2}", m.tpr, m.fpr);

    let scores = [0.9, 0.8, 0.7, 0.6, 0.5, 0.5, 0.2];
    let labels = [true, false, true, true, false, true, false];
    println!("auc = {:.4}", auc(&scores, &labels)?);
    Ok(())
}
