//! Minimal dense-network core for the trainer: forward/backward over
//! rectifier MLPs, bias-corrected Adam, and a diagonal-Gaussian policy head
//! with a state-independent learnable log standard deviation.
//!
//! Parameters live in one flat row-major buffer per network so optimizer
//! state and serialization stay trivial. Everything is double precision.

use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Fully connected network: affine layers with rectifier hidden activations
/// and an identity output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    dims: Vec<usize>,
    /// Per layer: weights in row-major (out × in) order, then biases.
    pub params: Vec<f64>,
}

/// Cached activations from one forward pass, consumed by `backward`.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// Input, every post-activation hidden vector, then the output.
    activations: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace holds at least the input")
    }
}

impl DenseNet {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidConfiguration(
                "a network needs an input and an output dimension".into(),
            ));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfiguration("zero-width layer".into()));
        }
        let count: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(DenseNet { dims: dims.to_vec(), params: vec![0.0; count] })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    /// Offset of layer `i`'s weight block; biases follow the weights.
    fn offset(&self, layer: usize) -> usize {
        self.dims
            .windows(2)
            .take(layer)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Scaled uniform fan-in initialization: weights uniform in ±gain·√(3/fan_in),
    /// biases zero. The output layer takes its own gain so a policy head can
    /// start near-deterministic.
    pub fn init_scaled_uniform<R: Rng>(&mut self, rng: &mut R, hidden_gain: f64, output_gain: f64) {
        let last = self.layer_count() - 1;
        for layer in 0..self.layer_count() {
            let (fan_in, fan_out) = (self.dims[layer], self.dims[layer + 1]);
            let gain = if layer == last { output_gain } else { hidden_gain };
            let limit = gain * (3.0 / fan_in as f64).sqrt();
            let base = self.offset(layer);
            for w in &mut self.params[base..base + fan_in * fan_out] {
                let u: f64 = rng.random();
                *w = limit * (2.0 * u - 1.0);
            }
            for b in &mut self.params[base + fan_in * fan_out..base + fan_in * fan_out + fan_out] {
                *b = 0.0;
            }
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(input)?.activations.pop().expect("non-empty"))
    }

    pub fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace> {
        if input.len() != self.dims[0] {
            return Err(Error::InvalidArgument(format!(
                "input has {} components, network wants {}",
                input.len(),
                self.dims[0]
            )));
        }
        let mut activations = Vec::with_capacity(self.dims.len());
        activations.push(input.to_vec());
        let last = self.layer_count() - 1;
        for layer in 0..self.layer_count() {
            let (fan_in, fan_out) = (self.dims[layer], self.dims[layer + 1]);
            let base = self.offset(layer);
            let x = &activations[layer];
            let mut y = vec![0.0; fan_out];
            for row in 0..fan_out {
                let w = &self.params[base + row * fan_in..base + (row + 1) * fan_in];
                let mut acc = self.params[base + fan_in * fan_out + row];
                for (wj, xj) in w.iter().zip(x) {
                    acc += wj * xj;
                }
                y[row] = if layer == last { acc } else { acc.max(0.0) };
            }
            activations.push(y);
        }
        Ok(ForwardTrace { activations })
    }

    fn check_trace(&self, trace: &ForwardTrace) -> Result<()> {
        if trace.activations.len() != self.dims.len()
            || trace
                .activations
                .iter()
                .zip(&self.dims)
                .any(|(a, &d)| a.len() != d)
        {
            return Err(Error::ContractViolation(
                "forward trace does not match this network's shape".into(),
            ));
        }
        Ok(())
    }

    /// Accumulates parameter gradients into `grad_params` (same layout as
    /// `params`) and returns the gradient with respect to the input.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        output_grad: &[f64],
        grad_params: &mut [f64],
    ) -> Result<Vec<f64>> {
        self.check_trace(trace)?;
        if output_grad.len() != *self.dims.last().expect("non-empty dims") {
            return Err(Error::InvalidArgument(format!(
                "output gradient has {} components, network emits {}",
                output_grad.len(),
                self.dims.last().expect("non-empty dims")
            )));
        }
        if grad_params.len() != self.params.len() {
            return Err(Error::InvalidArgument(
                "gradient buffer does not match parameter count".into(),
            ));
        }
        let mut delta = output_grad.to_vec();
        for layer in (0..self.layer_count()).rev() {
            let (fan_in, fan_out) = (self.dims[layer], self.dims[layer + 1]);
            let base = self.offset(layer);
            let x = &trace.activations[layer];
            let mut input_grad = vec![0.0; fan_in];
            for row in 0..fan_out {
                let d = delta[row];
                let wrow = base + row * fan_in;
                for j in 0..fan_in {
                    grad_params[wrow + j] += d * x[j];
                    input_grad[j] += d * self.params[wrow + j];
                }
                grad_params[base + fan_in * fan_out + row] += d;
            }
            if layer > 0 {
                // The input of this layer is a rectifier output; zero slope
                // where it was clipped.
                for (g, &a) in input_grad.iter_mut().zip(x) {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            delta = input_grad;
        }
        Ok(delta)
    }
}

/// Bias-corrected Adam over one flat parameter buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(lr: f64, param_count: usize) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter/state size mismatch");
        assert_eq!(grads.len(), self.m.len(), "gradient/state size mismatch");
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;

/// Diagonal-Gaussian policy: a network producing the mean and a learnable
/// state-independent log standard deviation per action dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPolicy {
    pub net: DenseNet,
    pub log_std: Vec<f64>,
}

/// One draw from the policy with the density evaluated at the raw sample.
#[derive(Clone, Debug)]
pub struct PolicySample {
    pub action: Vec<f64>,
    pub log_prob: f64,
}

impl GaussianPolicy {
    pub fn new(net: DenseNet, init_log_std: f64) -> Result<Self> {
        let action_dim = *net.dims().last().expect("non-empty dims");
        if !(LOG_STD_MIN..=LOG_STD_MAX).contains(&init_log_std) {
            return Err(Error::InvalidConfiguration(format!(
                "initial log std {init_log_std} outside [{LOG_STD_MIN}, {LOG_STD_MAX}]"
            )));
        }
        Ok(GaussianPolicy { net, log_std: vec![init_log_std; action_dim] })
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn mean(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.net.forward(obs)
    }

    pub fn clamp_log_std(&mut self) {
        for s in &mut self.log_std {
            *s = s.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    pub fn sample<R: Rng>(&self, obs: &[f64], rng: &mut R) -> Result<PolicySample> {
        let mean = self.mean(obs)?;
        let mut action = Vec::with_capacity(mean.len());
        for (mu, ls) in mean.iter().zip(&self.log_std) {
            let n: f64 = rng.sample(StandardNormal);
            action.push(mu + ls.exp() * n);
        }
        let log_prob = self.log_prob(&mean, &action);
        Ok(PolicySample { action, log_prob })
    }

    /// Log density of `action` under Normal(mean, diag(exp(2·log_std))).
    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        debug_assert_eq!(mean.len(), self.log_std.len());
        debug_assert_eq!(action.len(), self.log_std.len());
        let mut total = 0.0;
        for i in 0..mean.len() {
            let z = (action[i] - mean[i]) / self.log_std[i].exp();
            total += -0.5 * z * z - self.log_std[i] - 0.5 * (2.0 * PI).ln();
        }
        total
    }

    /// Gradients of `log_prob` with respect to the mean vector and log_std.
    pub fn log_prob_grad(&self, mean: &[f64], action: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut grad_mean = Vec::with_capacity(mean.len());
        let mut grad_log_std = Vec::with_capacity(mean.len());
        for i in 0..mean.len() {
            let sigma = self.log_std[i].exp();
            let z = (action[i] - mean[i]) / sigma;
            grad_mean.push(z / sigma);
            grad_log_std.push(z * z - 1.0);
        }
        (grad_mean, grad_log_std)
    }

    /// Differential entropy of the diagonal Gaussian.
    pub fn entropy(&self) -> f64 {
        self.log_std
            .iter()
            .map(|ls| ls + 0.5 * (2.0 * PI * std::f64::consts::E).ln())
            .sum()
    }
}

pub mod serialize {
    //! Whitespace-token checkpoint primitives. Values are written with the
    //! shortest decimal form that parses back to the same bits, so a
    //! write/read/write cycle is byte-identical.

    use super::{Adam, DenseNet, GaussianPolicy};
    use crate::{Error, Result};

    pub const VALUES_PER_LINE: usize = 8;

    pub fn push_values(out: &mut String, values: &[f64]) {
        for chunk in values.chunks(VALUES_PER_LINE) {
            let mut first = true;
            for v in chunk {
                if !first {
                    out.push(' ');
                }
                out.push_str(&format!("{v}"));
                first = false;
            }
            out.push('\n');
        }
    }

    /// Pull-based token reader over checkpoint text.
    pub struct Reader<'a> {
        tokens: std::str::SplitWhitespace<'a>,
    }

    impl<'a> Reader<'a> {
        pub fn new(text: &'a str) -> Self {
            Reader { tokens: text.split_whitespace() }
        }

        pub fn next_token(&mut self) -> Result<&'a str> {
            self.tokens
                .next()
                .ok_or_else(|| Error::MalformedFile("checkpoint ended early".into()))
        }

        pub fn expect(&mut self, word: &str) -> Result<()> {
            let got = self.next_token()?;
            if got != word {
                return Err(Error::MalformedFile(format!(
                    "expected `{word}`, found `{got}`"
                )));
            }
            Ok(())
        }

        pub fn read_usize(&mut self) -> Result<usize> {
            let tok = self.next_token()?;
            tok.parse()
                .map_err(|_| Error::MalformedFile(format!("bad integer `{tok}`")))
        }

        pub fn read_u64(&mut self) -> Result<u64> {
            let tok = self.next_token()?;
            tok.parse()
                .map_err(|_| Error::MalformedFile(format!("bad integer `{tok}`")))
        }

        pub fn read_f64(&mut self) -> Result<f64> {
            let tok = self.next_token()?;
            tok.parse()
                .map_err(|_| Error::MalformedFile(format!("bad real `{tok}`")))
        }

        pub fn read_values(&mut self, count: usize) -> Result<Vec<f64>> {
            (0..count).map(|_| self.read_f64()).collect()
        }

        pub fn finish(mut self) -> Result<()> {
            if let Some(extra) = self.tokens.next() {
                return Err(Error::MalformedFile(format!(
                    "trailing content starting at `{extra}`"
                )));
            }
            Ok(())
        }
    }

    /// `net <n_dims> <dims...> <params...>` block.
    pub fn push_net(out: &mut String, net: &DenseNet) {
        out.push_str("net ");
        out.push_str(&net.dims().len().to_string());
        for d in net.dims() {
            out.push(' ');
            out.push_str(&d.to_string());
        }
        out.push('\n');
        push_values(out, &net.params);
    }

    pub fn read_net(reader: &mut Reader) -> Result<DenseNet> {
        reader.expect("net")?;
        let n = reader.read_usize()?;
        if n < 2 || n > 64 {
            return Err(Error::MalformedFile(format!("implausible layer count {n}")));
        }
        let dims: Vec<usize> = (0..n)
            .map(|_| reader.read_usize())
            .collect::<Result<_>>()?;
        let mut net =
            DenseNet::new(&dims).map_err(|e| Error::MalformedFile(e.to_string()))?;
        let count = net.param_count();
        net.params = reader.read_values(count)?;
        Ok(net)
    }

    /// `adam <t> <m...> <v...>` block; the learning rate is supplied by the
    /// caller, not stored.
    pub fn push_adam(out: &mut String, adam: &Adam) {
        out.push_str("adam ");
        out.push_str(&adam.t.to_string());
        out.push('\n');
        push_values(out, &adam.m);
        push_values(out, &adam.v);
    }

    pub fn read_adam(reader: &mut Reader, lr: f64, param_count: usize) -> Result<Adam> {
        reader.expect("adam")?;
        let t = reader.read_u64()?;
        let m = reader.read_values(param_count)?;
        let v = reader.read_values(param_count)?;
        let mut adam = Adam::new(lr, param_count);
        adam.t = t;
        adam.m = m;
        adam.v = v;
        Ok(adam)
    }

    /// `policy` block: the mean network followed by log_std values.
    pub fn push_policy(out: &mut String, policy: &GaussianPolicy) {
        out.push_str("policy\n");
        push_net(out, &policy.net);
        out.push_str("log_std\n");
        push_values(out, &policy.log_std);
    }

    pub fn read_policy(reader: &mut Reader) -> Result<GaussianPolicy> {
        reader.expect("policy")?;
        let net = read_net(reader)?;
        reader.expect("log_std")?;
        let dim = *net.dims().last().expect("non-empty dims");
        let log_std = reader.read_values(dim)?;
        Ok(GaussianPolicy { net, log_std })
    }
}
