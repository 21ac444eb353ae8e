//! Minimal dense networks for the actor and critics: f64 weights, ReLU
//! hidden layers, manual backprop with input gradients, Adam, and Polyak
//! target tracking. Everything is deterministic given the RNG stream, and
//! checkpoints round trip bit for bit.

use rand::Rng;
use std::io::{self, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("bad architecture: {0}")]
    Architecture(String),
    #[error("gradient contains a non-finite value")]
    NonFiniteGradient,
    #[error("bad network file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Output-layer activation. Hidden layers are always ReLU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Dot product with four accumulators so the loop vectorizes cleanly.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let ra = ca.remainder();
    let rb = cb.remainder();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(out: &mut [f64], a: &[f64], s: f64) {
    debug_assert_eq!(out.len(), a.len());
    for (o, x) in out.iter_mut().zip(a) {
        *o += s * x;
    }
}

/// Fully connected network. `weights[l]` is row major, one row per output
/// unit of layer `l`. Parameters are public so tests and verification
/// harnesses can hand-set or perturb them; `sizes` stays private and fixes
/// every vector's length.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    out_act: Activation,
}

/// Per-layer activations recorded by a forward pass, input first.
#[derive(Debug, Clone)]
pub struct Trace {
    pub activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace has layers")
    }
}

/// Parameter-shaped gradient buffers plus the gradient at the input.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Gradients {
        Gradients {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            input: vec![0.0; net.sizes[0]],
        }
    }

    pub fn clear(&mut self) {
        for w in &mut self.weights {
            w.fill(0.0);
        }
        for b in &mut self.biases {
            b.fill(0.0);
        }
        self.input.fill(0.0);
    }

    /// Scale every parameter gradient (used to average over a batch).
    /// The input gradient is scaled too.
    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for x in w.iter_mut() {
                *x *= s;
            }
        }
        for b in &mut self.biases {
            for x in b.iter_mut() {
                *x *= s;
            }
        }
        for x in &mut self.input {
            *x *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<(), NnError> {
    if sizes.len() < 2 {
        return Err(NnError::Architecture(format!(
            "need at least input and output layers, got {} sizes",
            sizes.len()
        )));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(NnError::Architecture("zero-width layer".into()));
    }
    Ok(())
}

impl Mlp {
    /// Random initialization: weights and biases uniform in
    /// [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    pub fn init<R: Rng>(sizes: &[usize], out_act: Activation, rng: &mut R) -> Result<Mlp, NnError> {
        validate_sizes(sizes)?;
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
            );
            biases.push((0..fan_out).map(|_| rng.gen_range(-bound..bound)).collect());
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            weights,
            biases,
            out_act,
        })
    }

    /// All-zero parameters. With a tanh head this is the "do nothing" policy.
    pub fn zeros(sizes: &[usize], out_act: Activation) -> Result<Mlp, NnError> {
        validate_sizes(sizes)?;
        let weights = (0..sizes.len() - 1)
            .map(|l| vec![0.0; sizes[l] * sizes[l + 1]])
            .collect();
        let biases = (0..sizes.len() - 1).map(|l| vec![0.0; sizes[l + 1]]).collect();
        Ok(Mlp {
            sizes: sizes.to_vec(),
            weights,
            biases,
            out_act,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn activation(&self) -> Activation {
        self.out_act
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    fn layer_forward(&self, l: usize, x: &[f64], out: &mut Vec<f64>) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = &self.weights[l];
        let b = &self.biases[l];
        out.clear();
        let last = l == self.sizes.len() - 2;
        for o in 0..n_out {
            let z = b[o] + dot(&w[o * n_in..(o + 1) * n_in], x);
            out.push(if last {
                match self.out_act {
                    Activation::Identity => z,
                    Activation::Tanh => z.tanh(),
                }
            } else {
                z.max(0.0)
            });
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.sizes[0], "input length mismatch");
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in 0..self.sizes.len() - 1 {
            self.layer_forward(l, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Forward pass keeping every layer's activations for backprop.
    pub fn forward_trace(&self, x: &[f64]) -> Trace {
        assert_eq!(x.len(), self.sizes[0], "input length mismatch");
        let mut activations = Vec::with_capacity(self.sizes.len());
        activations.push(x.to_vec());
        for l in 0..self.sizes.len() - 1 {
            let mut out = Vec::new();
            self.layer_forward(l, activations.last().unwrap(), &mut out);
            activations.push(out);
        }
        Trace { activations }
    }

    /// Accumulate parameter and input gradients for one sample into `grads`,
    /// given the loss gradient at the network output. ReLU masks use the
    /// recorded activations (a > 0 iff z > 0); the tanh derivative is
    /// reconstructed from the output.
    pub fn backward_into(&self, trace: &Trace, out_grad: &[f64], grads: &mut Gradients) {
        let layers = self.sizes.len() - 1;
        assert_eq!(out_grad.len(), self.output_dim(), "output grad length mismatch");
        assert_eq!(trace.activations.len(), layers + 1, "trace/net mismatch");

        let y = trace.output();
        let mut delta: Vec<f64> = match self.out_act {
            Activation::Identity => out_grad.to_vec(),
            Activation::Tanh => out_grad
                .iter()
                .zip(y)
                .map(|(g, a)| g * (1.0 - a * a))
                .collect(),
        };

        for l in (0..layers).rev() {
            let n_in = self.sizes[l];
            let a_prev = &trace.activations[l];
            let w = &self.weights[l];
            let dw = &mut grads.weights[l];
            let db = &mut grads.biases[l];
            let mut g_prev = vec![0.0; n_in];
            for (o, &d) in delta.iter().enumerate() {
                db[o] += d;
                let row = &w[o * n_in..(o + 1) * n_in];
                axpy(&mut dw[o * n_in..(o + 1) * n_in], a_prev, d);
                axpy(&mut g_prev, row, d);
            }
            if l > 0 {
                // Propagate through the hidden ReLU.
                for (g, &a) in g_prev.iter_mut().zip(a_prev) {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                }
                delta = g_prev;
            } else {
                axpy(&mut grads.input, &g_prev, 1.0);
            }
        }
    }

    /// Gradients of a scalar-composed loss for a single input, fresh buffers.
    pub fn backprop(&self, x: &[f64], out_grad: &[f64]) -> Gradients {
        let trace = self.forward_trace(x);
        let mut grads = Gradients::zeros_like(self);
        self.backward_into(&trace, out_grad, &mut grads);
        grads
    }

    /// Input sensitivity only: the same backward sweep as `backward_into`
    /// with the parameter-gradient accumulation skipped. Used to push value
    /// gradients through a frozen critic into the actor.
    pub fn input_gradient(&self, trace: &Trace, out_grad: &[f64]) -> Vec<f64> {
        let layers = self.sizes.len() - 1;
        assert_eq!(out_grad.len(), self.output_dim(), "output grad length mismatch");
        assert_eq!(trace.activations.len(), layers + 1, "trace/net mismatch");
        let y = trace.output();
        let mut delta: Vec<f64> = match self.out_act {
            Activation::Identity => out_grad.to_vec(),
            Activation::Tanh => out_grad
                .iter()
                .zip(y)
                .map(|(g, a)| g * (1.0 - a * a))
                .collect(),
        };
        for l in (0..layers).rev() {
            let n_in = self.sizes[l];
            let w = &self.weights[l];
            let mut g_prev = vec![0.0; n_in];
            for (o, &d) in delta.iter().enumerate() {
                axpy(&mut g_prev, &w[o * n_in..(o + 1) * n_in], d);
            }
            if l > 0 {
                let a_prev = &trace.activations[l];
                for (g, &a) in g_prev.iter_mut().zip(a_prev) {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            delta = g_prev;
        }
        delta
    }

    /// Serialize as a versioned little-endian binary blob.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"MLP1")?;
        w.write_all(&[1u8])?;
        w.write_all(&[match self.out_act {
            Activation::Identity => 0u8,
            Activation::Tanh => 1u8,
        }])?;
        w.write_all(&(self.sizes.len() as u32).to_le_bytes())?;
        for &s in &self.sizes {
            w.write_all(&(s as u32).to_le_bytes())?;
        }
        let mut buf = Vec::new();
        for l in 0..self.sizes.len() - 1 {
            for &x in &self.weights[l] {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            for &x in &self.biases[l] {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        w.write_all(&buf)
    }

    /// Inverse of `write_to`. Rejects unknown magic, version, activation
    /// tags and malformed shapes; truncated input surfaces as an IO error.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Mlp, NnError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"MLP1" {
            return Err(NnError::Format("bad magic".into()));
        }
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)?;
        if byte[0] != 1 {
            return Err(NnError::Format(format!("unsupported version {}", byte[0])));
        }
        r.read_exact(&mut byte)?;
        let out_act = match byte[0] {
            0 => Activation::Identity,
            1 => Activation::Tanh,
            t => return Err(NnError::Format(format!("unknown activation tag {t}"))),
        };
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let n_sizes = u32::from_le_bytes(u32buf) as usize;
        if !(2..=64).contains(&n_sizes) {
            return Err(NnError::Format(format!("implausible layer count {n_sizes}")));
        }
        let mut sizes = Vec::with_capacity(n_sizes);
        for _ in 0..n_sizes {
            r.read_exact(&mut u32buf)?;
            sizes.push(u32::from_le_bytes(u32buf) as usize);
        }
        validate_sizes(&sizes).map_err(|e| NnError::Format(e.to_string()))?;
        if sizes.iter().any(|&s| s > 1 << 20) {
            return Err(NnError::Format("implausible layer width".into()));
        }
        let mut f64buf = [0u8; 8];
        let mut read_f64 = |r: &mut R| -> Result<f64, NnError> {
            r.read_exact(&mut f64buf)?;
            Ok(f64::from_le_bytes(f64buf))
        };
        let mut weights = Vec::with_capacity(n_sizes - 1);
        let mut biases = Vec::with_capacity(n_sizes - 1);
        for l in 0..n_sizes - 1 {
            let mut w = Vec::with_capacity(sizes[l] * sizes[l + 1]);
            for _ in 0..sizes[l] * sizes[l + 1] {
                w.push(read_f64(r)?);
            }
            let mut b = Vec::with_capacity(sizes[l + 1]);
            for _ in 0..sizes[l + 1] {
                b.push(read_f64(r)?);
            }
            weights.push(w);
            biases.push(b);
        }
        Ok(Mlp {
            sizes,
            weights,
            biases,
            out_act,
        })
    }

    fn same_shape(&self, other: &Mlp) -> bool {
        self.sizes == other.sizes && self.out_act == other.out_act
    }
}

/// First and second moment buffers for Adam, one pair per parameter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(net: &Mlp) -> AdamState {
        AdamState {
            m_w: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

#[inline]
fn adam_update(theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], lr: f64, bc1: f64, bc2: f64) {
    for i in 0..theta.len() {
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        theta[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

/// One Adam step. Gradients with any non-finite entry are rejected without
/// touching the parameters or the moment buffers.
pub fn adam_step(
    net: &mut Mlp,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<(), NnError> {
    if !grads.is_finite() {
        return Err(NnError::NonFiniteGradient);
    }
    state.t += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(state.t as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(state.t as i32);
    for l in 0..net.weights.len() {
        adam_update(
            &mut net.weights[l],
            &grads.weights[l],
            &mut state.m_w[l],
            &mut state.v_w[l],
            lr,
            bc1,
            bc2,
        );
        adam_update(
            &mut net.biases[l],
            &grads.biases[l],
            &mut state.m_b[l],
            &mut state.v_b[l],
            lr,
            bc1,
            bc2,
        );
    }
    Ok(())
}

/// Polyak averaging: target <- (1 - tau) * target + tau * source.
/// Architectures must match.
pub fn polyak_update(target: &mut Mlp, source: &Mlp, tau: f64) {
    assert!(target.same_shape(source), "polyak on mismatched networks");
    for l in 0..target.weights.len() {
        for (t, s) in target.weights[l].iter_mut().zip(&source.weights[l]) {
            *t = (1.0 - tau) * *t + tau * s;
        }
        for (t, s) in target.biases[l].iter_mut().zip(&source.biases[l]) {
            *t = (1.0 - tau) * *t + tau * s;
        }
    }
}
