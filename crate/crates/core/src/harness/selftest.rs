//! Built-in invariant suites runnable from the command line. Each suite
//! prints one line on success; the first failure aborts with a message.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::ahp::{derive_weights, CategoryWeightTable};
use crate::nn::{Activation, Mlp};
use crate::replay::{Experience, LabeledBuffer};
use crate::world::{Action, CategoryLabel};

use super::HarnessError;

pub fn run_selftest() -> Result<(), HarnessError> {
    gradient_check()?;
    calibration_round_trip()?;
    replay_partition_fuzz()?;
    Ok(())
}

fn err(msg: String) -> HarnessError {
    HarnessError::Selftest(msg)
}

/// Analytic parameter and input gradients against central finite
/// differences on a spread of random networks.
fn gradient_check() -> Result<(), HarnessError> {
    const NETS: usize = 8;
    const TOL: f64 = 1e-4;
    let shapes: [(&[usize], Activation); 4] = [
        (&[6, 12, 5, 2], Activation::Tanh),
        (&[7, 10, 1], Activation::Identity),
        (&[3, 9, 9, 4], Activation::Tanh),
        (&[11, 6, 3], Activation::Identity),
    ];
    let mut rng = ChaCha12Rng::seed_from_u64(0x5e1f);
    let mut worst = 0.0f64;

    for trial in 0..NETS {
        let (sizes, act) = shapes[trial % shapes.len()];
        let mut net =
            Mlp::init(sizes, act, &mut rng).map_err(|e| err(format!("gradient check: {e}")))?;
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let v: Vec<f64> = (0..*sizes.last().unwrap())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let loss = |net: &Mlp, x: &[f64]| -> f64 {
            net.forward(x).iter().zip(&v).map(|(o, w)| o * w).sum()
        };
        let analytic = net.backprop(&x, &v);

        let rel = |fd: f64, an: f64| (fd - an).abs() / fd.abs().max(an.abs()).max(1e-3);
        for layer in 0..analytic.weights.len() {
            for i in 0..analytic.weights[layer].len() {
                let w0 = net.weights[layer][i];
                let h = 1e-5 * (1.0 + w0.abs());
                net.weights[layer][i] = w0 + h;
                let hi = loss(&net, &x);
                net.weights[layer][i] = w0 - h;
                let lo = loss(&net, &x);
                net.weights[layer][i] = w0;
                let e = rel((hi - lo) / (2.0 * h), analytic.weights[layer][i]);
                worst = worst.max(e);
            }
            for i in 0..analytic.biases[layer].len() {
                let b0 = net.biases[layer][i];
                let h = 1e-5 * (1.0 + b0.abs());
                net.biases[layer][i] = b0 + h;
                let hi = loss(&net, &x);
                net.biases[layer][i] = b0 - h;
                let lo = loss(&net, &x);
                net.biases[layer][i] = b0;
                let e = rel((hi - lo) / (2.0 * h), analytic.biases[layer][i]);
                worst = worst.max(e);
            }
        }
        for i in 0..x.len() {
            let mut xp = x.clone();
            let h = 1e-5 * (1.0 + x[i].abs());
            xp[i] = x[i] + h;
            let hi = loss(&net, &xp);
            xp[i] = x[i] - h;
            let lo = loss(&net, &xp);
            let e = rel((hi - lo) / (2.0 * h), analytic.input[i]);
            worst = worst.max(e);
        }
    }
    if worst >= TOL {
        return Err(err(format!(
            "gradient check: max relative error {worst:.3e} exceeds {TOL:.0e}"
        )));
    }
    println!("gradient check: ok (max relative error {worst:.3e}, {NETS} networks)");
    Ok(())
}

/// The category weight table must survive the round trip through its
/// consistent judgement matrices, which must themselves be consistent.
fn calibration_round_trip() -> Result<(), HarnessError> {
    let table = CategoryWeightTable::default();
    let matrices = table.calibration_matrices();
    let mut worst = 0.0f64;
    for (label, matrix) in CategoryLabel::ALL.iter().zip(&matrices) {
        let (recovered, lambda) =
            derive_weights(matrix).map_err(|e| err(format!("weight calibration: {e}")))?;
        let want = table.weights_for(*label).as_array();
        let got = recovered.as_array();
        for (w, g) in want.iter().zip(&got) {
            worst = worst.max((w - g).abs());
        }
        let cr = crate::ahp::consistency_ratio(matrix, lambda);
        if cr.abs() >= 1e-9 {
            return Err(err(format!(
                "weight calibration: {label} matrix has consistency ratio {cr:.3e}"
            )));
        }
        // Residual of the eigenpair on the reconstructed matrix.
        let n = matrix.order();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += matrix.get(i, j) * got[j];
            }
            let residual = (acc - lambda * got[i]).abs();
            if residual >= 1e-8 {
                return Err(err(format!(
                    "weight calibration: {label} eigenpair residual {residual:.3e}"
                )));
            }
        }
    }
    if worst >= 1e-3 {
        return Err(err(format!(
            "weight calibration: round-trip error {worst:.3e} exceeds 1e-3"
        )));
    }
    println!("weight calibration round-trip: ok (max component error {worst:.3e})");
    Ok(())
}

/// Hammer a small ring with pushes and samples; the per-label partitions
/// must tile the live slots after every batch of operations.
fn replay_partition_fuzz() -> Result<(), HarnessError> {
    const OPS: usize = 100_000;
    const CAPACITY: usize = 512;
    let mut rng = ChaCha12Rng::seed_from_u64(0xf022);
    let mut buffer = LabeledBuffer::new(CAPACITY, 4);
    for op in 1..=OPS {
        let label = CategoryLabel::from_index(rng.gen_range(0..4)).expect("label index");
        buffer.push(Experience {
            state: vec![rng.gen(), rng.gen(), rng.gen(), rng.gen()],
            action: Action::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            reward: rng.gen_range(-10.0..10.0),
            next_state: vec![rng.gen(), rng.gen(), rng.gen(), rng.gen()],
            done: rng.gen_bool(0.05),
            label,
        });
        if op % 997 == 0 {
            buffer
                .validate_partitions()
                .map_err(|e| err(format!("replay partition fuzz: after {op} ops: {e}")))?;
            let label = CategoryLabel::from_index(rng.gen_range(0..4)).expect("label index");
            if buffer.sample_pair_batch(label, 32, &mut rng).is_none() && buffer.len() >= 32 {
                return Err(err(format!(
                    "replay partition fuzz: sampling failed with {} stored",
                    buffer.len()
                )));
            }
        }
    }
    buffer
        .validate_partitions()
        .map_err(|e| err(format!("replay partition fuzz: final: {e}")))?;
    println!("replay partition fuzz: ok ({OPS} operations, {CAPACITY}-slot ring)");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        run_selftest().unwrap();
    }
}
