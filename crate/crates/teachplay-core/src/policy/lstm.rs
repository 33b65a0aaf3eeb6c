//! Stacked LSTM with an affine output layer, flat parameter storage, and
//! exact backpropagation through time.
//!
//! Parameters live in one flat `Vec<f64>` so the optimizer and the
//! finite-difference checks can treat the model as a single vector. Layout
//! per layer: `wx [4H x in]`, `wh [4H x H]`, `b [4H]`, followed by the
//! output layer `w_out [O x H]`, `b_out [O]`. Gate rows are blocked in the
//! order input, forget, cell, output.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng::Seeded;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    pub num_layers: usize,
    pub hidden: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    /// Truncated-BPTT window length, model ticks.
    pub window: usize,
}

impl PolicyConfig {
    /// Flat parameter count.
    pub fn param_len(&self) -> usize {
        let h = self.hidden;
        let mut n = 0;
        for l in 0..self.num_layers {
            let input = if l == 0 { self.input_dim } else { h };
            n += 4 * h * input + 4 * h * h + 4 * h;
        }
        n + self.output_dim * h + self.output_dim
    }

    /// Offset of layer `l`'s block in the flat vector.
    fn layer_offset(&self, l: usize) -> usize {
        let h = self.hidden;
        let mut off = 0;
        for k in 0..l {
            let input = if k == 0 { self.input_dim } else { h };
            off += 4 * h * input + 4 * h * h + 4 * h;
        }
        off
    }

    fn layer_input(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim
        } else {
            self.hidden
        }
    }

    fn out_offset(&self) -> usize {
        self.layer_offset(self.num_layers)
    }
}

/// Flat LSTM + output-layer weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub config: PolicyConfig,
    pub data: Vec<f64>,
}

impl PolicyParams {
    pub fn zeros(config: PolicyConfig) -> Self {
        PolicyParams {
            data: vec![0.0; config.param_len()],
            config,
        }
    }

    /// Uniform fan-in initialization with the forget-gate bias at +1.
    pub fn init(config: PolicyConfig, rng: &mut Seeded) -> Self {
        let mut p = PolicyParams::zeros(config);
        let h = config.hidden;
        for l in 0..config.num_layers {
            let input = config.layer_input(l);
            let off = config.layer_offset(l);
            let sx = 1.0 / libm::sqrt(input as f64);
            for v in p.data[off..off + 4 * h * input].iter_mut() {
                *v = rng.uniform(-sx, sx);
            }
            let sh = 1.0 / libm::sqrt(h as f64);
            let wh = off + 4 * h * input;
            for v in p.data[wh..wh + 4 * h * h].iter_mut() {
                *v = rng.uniform(-sh, sh);
            }
            let b = wh + 4 * h * h;
            // forget gates: rows h..2h
            for v in p.data[b + h..b + 2 * h].iter_mut() {
                *v = 1.0;
            }
        }
        let oo = config.out_offset();
        let so = 1.0 / libm::sqrt(h as f64);
        for v in p.data[oo..oo + config.output_dim * h].iter_mut() {
            *v = rng.uniform(-so, so);
        }
        p
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Hidden and cell state for all layers.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl HiddenState {
    pub fn zeros(config: &PolicyConfig) -> Self {
        HiddenState {
            h: vec![vec![0.0; config.hidden]; config.num_layers],
            c: vec![vec![0.0; config.hidden]; config.num_layers],
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Dot product with independent partial accumulators so the reduction can
/// vectorize (a single serial accumulator cannot, FP addition not being
/// associative).
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mut acc = [0.0f64; 8];
    let chunks = n / 8;
    for k in 0..chunks {
        let i = 8 * k;
        let (ra, rb) = (&a[i..i + 8], &b[i..i + 8]);
        for j in 0..8 {
            acc[j] += ra[j] * rb[j];
        }
    }
    let mut s = 0.0;
    for v in acc {
        s += v;
    }
    for i in 8 * chunks..n {
        s += a[i] * b[i];
    }
    s
}

/// y += m x, with `m` row-major `[rows x cols]`.
fn matvec_acc(m: &[f64], x: &[f64], y: &mut [f64], rows: usize, cols: usize) {
    for r in 0..rows {
        y[r] += dot(&m[r * cols..(r + 1) * cols], x);
    }
}

/// y += m^T x, accumulating into `y[cols]`.
fn matvec_t_acc(m: &[f64], x: &[f64], y: &mut [f64], rows: usize, cols: usize) {
    for r in 0..rows {
        let row = &m[r * cols..(r + 1) * cols];
        let xr = x[r];
        if xr != 0.0 {
            for (yv, a) in y.iter_mut().zip(row.iter()) {
                *yv += a * xr;
            }
        }
    }
}

/// g += x_outer (outer product accumulate): g[r*cols + c] += d[r] * x[c].
fn outer_acc(g: &mut [f64], d: &[f64], x: &[f64], rows: usize, cols: usize) {
    for r in 0..rows {
        let dr = d[r];
        if dr != 0.0 {
            let row = &mut g[r * cols..(r + 1) * cols];
            for (gv, xv) in row.iter_mut().zip(x.iter()) {
                *gv += dr * xv;
            }
        }
    }
}

/// Column-major copies of the weight blocks, rebuilt once per sequence
/// pass. They turn the forward matvecs into reduction-free column updates,
/// which vectorize much better than row dot products.
struct Transposed {
    /// Per layer: `[layer_input][4H]`, column d at `d * 4H`.
    wx: Vec<Vec<f64>>,
    /// Per layer: `[H][4H]`.
    wh: Vec<Vec<f64>>,
}

impl Transposed {
    fn build(params: &PolicyParams) -> Transposed {
        let cfg = &params.config;
        let h = cfg.hidden;
        let mut wx = Vec::with_capacity(cfg.num_layers);
        let mut wh = Vec::with_capacity(cfg.num_layers);
        for l in 0..cfg.num_layers {
            let input_dim = cfg.layer_input(l);
            let off = cfg.layer_offset(l);
            let mut tx = vec![0.0; 4 * h * input_dim];
            for r in 0..4 * h {
                for d in 0..input_dim {
                    tx[d * 4 * h + r] = params.data[off + r * input_dim + d];
                }
            }
            let wh_off = off + 4 * h * input_dim;
            let mut th = vec![0.0; 4 * h * h];
            for r in 0..4 * h {
                for d in 0..h {
                    th[d * 4 * h + r] = params.data[wh_off + r * h + d];
                }
            }
            wx.push(tx);
            wh.push(th);
        }
        Transposed { wx, wh }
    }
}

/// z += M x with `cols` holding M column-major (`z.len()` rows per column).
fn axpy_cols(cols: &[f64], x: &[f64], z: &mut [f64]) {
    let rows = z.len();
    for (d, &xv) in x.iter().enumerate() {
        let col = &cols[d * rows..(d + 1) * rows];
        for (zv, cv) in z.iter_mut().zip(col.iter()) {
            *zv += xv * cv;
        }
    }
}

/// Per-timestep, per-layer values cached for the backward pass.
struct StepCache {
    /// Input to this layer at this step.
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Activated gates: i, f, g, o (each `hidden` wide).
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// One LSTM tick for all layers. Returns the model output and, if `cache`
/// is given, pushes the per-layer step caches for BPTT.
fn step_layers(
    params: &PolicyParams,
    tp: Option<&Transposed>,
    input: &[f64],
    state: &mut HiddenState,
    cache: Option<&mut Vec<Vec<StepCache>>>,
) -> Vec<f64> {
    let cfg = &params.config;
    let h = cfg.hidden;
    let mut step_caches = cache.map(|c| {
        c.push(Vec::with_capacity(cfg.num_layers));
        c
    });
    let mut x: Vec<f64> = input.to_vec();
    for l in 0..cfg.num_layers {
        let input_dim = cfg.layer_input(l);
        let off = cfg.layer_offset(l);
        let wx = &params.data[off..off + 4 * h * input_dim];
        let wh_off = off + 4 * h * input_dim;
        let wh = &params.data[wh_off..wh_off + 4 * h * h];
        let b = &params.data[wh_off + 4 * h * h..wh_off + 4 * h * h + 4 * h];

        let mut z: Vec<f64> = b.to_vec();
        match tp {
            Some(t) => {
                axpy_cols(&t.wx[l], &x, &mut z);
                axpy_cols(&t.wh[l], &state.h[l], &mut z);
            }
            None => {
                matvec_acc(wx, &x, &mut z, 4 * h, input_dim);
                matvec_acc(wh, &state.h[l], &mut z, 4 * h, h);
            }
        }

        let mut gates = vec![0.0; 4 * h];
        for k in 0..h {
            gates[k] = sigmoid(z[k]); // input gate
            gates[h + k] = sigmoid(z[h + k]); // forget gate
            gates[2 * h + k] = libm::tanh(z[2 * h + k]); // cell candidate
            gates[3 * h + k] = sigmoid(z[3 * h + k]); // output gate
        }
        let c_prev = state.c[l].clone();
        let h_prev = state.h[l].clone();
        let mut c = vec![0.0; h];
        let mut tanh_c = vec![0.0; h];
        let mut h_new = vec![0.0; h];
        for k in 0..h {
            c[k] = gates[h + k] * c_prev[k] + gates[k] * gates[2 * h + k];
            tanh_c[k] = libm::tanh(c[k]);
            h_new[k] = gates[3 * h + k] * tanh_c[k];
        }
        state.c[l] = c.clone();
        state.h[l] = h_new.clone();
        if let Some(cc) = step_caches.as_deref_mut() {
            cc.last_mut().unwrap().push(StepCache {
                x: x.clone(),
                h_prev,
                c_prev,
                gates,
                tanh_c,
            });
        }
        x = h_new;
    }
    // output layer
    let oo = cfg.out_offset();
    let w_out = &params.data[oo..oo + cfg.output_dim * h];
    let b_out = &params.data[oo + cfg.output_dim * h..];
    let mut y: Vec<f64> = b_out.to_vec();
    matvec_acc(w_out, &x, &mut y, cfg.output_dim, h);
    y
}

/// Stateful single-tick inference.
pub fn predict_step(
    params: &PolicyParams,
    state: &mut HiddenState,
    input: &[f64],
) -> Option<Vec<f64>> {
    if input.len() != params.config.input_dim || input.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(step_layers(params, None, input, state, None))
}

/// Runs a whole sequence from the given state (zeros if `None`). Returns
/// the output sequence and the final hidden state.
pub fn forward(
    params: &PolicyParams,
    inputs: &[Vec<f64>],
    from: Option<HiddenState>,
) -> (Vec<Vec<f64>>, HiddenState) {
    let mut state = from.unwrap_or_else(|| HiddenState::zeros(&params.config));
    let tp = Transposed::build(params);
    let mut out = Vec::with_capacity(inputs.len());
    for x in inputs {
        out.push(step_layers(params, Some(&tp), x, &mut state, None));
    }
    (out, state)
}

/// Mean squared error over all steps and dimensions.
pub fn loss(outputs: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    let mut n = 0usize;
    for (o, t) in outputs.iter().zip(targets.iter()) {
        for (a, b) in o.iter().zip(t.iter()) {
            let e = a - b;
            acc += e * e;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        acc / n as f64
    }
}

/// Loss and exact parameter gradient for one sequence, processed as
/// consecutive truncated-BPTT windows with hidden-state carry. The
/// gradient is accumulated into `grad` (same layout as the params); the
/// loss is the mean squared error over the whole sequence.
pub fn grad_sequence(
    params: &PolicyParams,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    grad: &mut [f64],
) -> f64 {
    let cfg = &params.config;
    let h = cfg.hidden;
    let total = inputs.len();
    debug_assert_eq!(total, targets.len());
    let denom = (total * cfg.output_dim) as f64;
    let mut state = HiddenState::zeros(cfg);
    let tp = Transposed::build(params);
    let mut loss_acc = 0.0;

    let oo = cfg.out_offset();
    let mut start = 0;
    while start < total {
        let end = (start + cfg.window).min(total);
        let span = end - start;
        // forward with cache
        let mut caches: Vec<Vec<StepCache>> = Vec::with_capacity(span);
        let mut outputs = Vec::with_capacity(span);
        let mut top_h = Vec::with_capacity(span);
        for t in start..end {
            let y = step_layers(params, Some(&tp), &inputs[t], &mut state, Some(&mut caches));
            top_h.push(state.h[cfg.num_layers - 1].clone());
            outputs.push(y);
        }
        // output layer grads + dL/d(top h)
        let w_out = &params.data[oo..oo + cfg.output_dim * h];
        let mut dh_top = vec![vec![0.0; h]; span];
        {
            let (g_wout, g_bout) = {
                let (a, b) = grad[oo..].split_at_mut(cfg.output_dim * h);
                (a, b)
            };
            for t in 0..span {
                let mut dy = vec![0.0; cfg.output_dim];
                for d in 0..cfg.output_dim {
                    let e = outputs[t][d] - targets[start + t][d];
                    loss_acc += e * e;
                    dy[d] = 2.0 * e / denom;
                }
                outer_acc(g_wout, &dy, &top_h[t], cfg.output_dim, h);
                for (gb, d) in g_bout.iter_mut().zip(dy.iter()) {
                    *gb += d;
                }
                matvec_t_acc(w_out, &dy, &mut dh_top[t], cfg.output_dim, h);
            }
        }
        // BPTT: walk timesteps in reverse, layers top to bottom within one
        // step; dh/dc carries cross timesteps, dx feeds the layer below.
        let mut dh_carry = vec![vec![0.0; h]; cfg.num_layers];
        let mut dc_carry = vec![vec![0.0; h]; cfg.num_layers];
        for t in (0..span).rev() {
            let mut dx_from_above: Vec<f64> = Vec::new();
            for l in (0..cfg.num_layers).rev() {
                let input_dim = cfg.layer_input(l);
                let off = cfg.layer_offset(l);
                let wh_off = off + 4 * h * input_dim;
                let cache = &caches[t][l];

                let mut dh = core::mem::take(&mut dh_carry[l]);
                if l == cfg.num_layers - 1 {
                    for (a, b) in dh.iter_mut().zip(dh_top[t].iter()) {
                        *a += b;
                    }
                } else {
                    for (a, b) in dh.iter_mut().zip(dx_from_above.iter()) {
                        *a += b;
                    }
                }
                let dc_in = core::mem::take(&mut dc_carry[l]);

                let gates = &cache.gates;
                let mut dz = vec![0.0; 4 * h];
                let mut dc_prev = vec![0.0; h];
                for k in 0..h {
                    let i = gates[k];
                    let f = gates[h + k];
                    let g = gates[2 * h + k];
                    let o = gates[3 * h + k];
                    let tc = cache.tanh_c[k];
                    let d_o = dh[k] * tc;
                    let d_c = dc_in[k] + dh[k] * o * (1.0 - tc * tc);
                    let d_i = d_c * g;
                    let d_f = d_c * cache.c_prev[k];
                    let d_g = d_c * i;
                    dc_prev[k] = d_c * f;
                    dz[k] = d_i * i * (1.0 - i);
                    dz[h + k] = d_f * f * (1.0 - f);
                    dz[2 * h + k] = d_g * (1.0 - g * g);
                    dz[3 * h + k] = d_o * o * (1.0 - o);
                }
                // parameter grads
                {
                    let gwx = &mut grad[off..off + 4 * h * input_dim];
                    outer_acc(gwx, &dz, &cache.x, 4 * h, input_dim);
                }
                {
                    let gwh = &mut grad[wh_off..wh_off + 4 * h * h];
                    outer_acc(gwh, &dz, &cache.h_prev, 4 * h, h);
                }
                {
                    let gb = &mut grad[wh_off + 4 * h * h..wh_off + 4 * h * h + 4 * h];
                    for (g, d) in gb.iter_mut().zip(dz.iter()) {
                        *g += d;
                    }
                }
                // propagate to previous timestep and to the layer below
                let wh = &params.data[wh_off..wh_off + 4 * h * h];
                let mut dh_prev = vec![0.0; h];
                matvec_t_acc(wh, &dz, &mut dh_prev, 4 * h, h);
                dh_carry[l] = dh_prev;
                dc_carry[l] = dc_prev;
                let wx = &params.data[off..off + 4 * h * input_dim];
                let mut dx = vec![0.0; input_dim];
                matvec_t_acc(wx, &dz, &mut dx, 4 * h, input_dim);
                dx_from_above = dx;
            }
        }
        // truncation: state gradients do not cross the window boundary
        start = end;
    }
    loss_acc / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> PolicyConfig {
        PolicyConfig {
            num_layers: 2,
            hidden: 4,
            input_dim: 3,
            output_dim: 2,
            window: 64,
        }
    }

    fn tiny_inputs(n: usize, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = Seeded::new(11);
        (0..n)
            .map(|_| (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .collect()
    }

    #[test]
    fn zero_weights_zero_outputs() {
        let p = PolicyParams::zeros(tiny_config());
        let (out, _) = forward(&p, &tiny_inputs(5, 3), None);
        for o in out {
            assert!(o.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn length_one_equals_predict_step() {
        let mut rng = Seeded::new(3);
        let p = PolicyParams::init(tiny_config(), &mut rng);
        let inputs = tiny_inputs(1, 3);
        let (out, _) = forward(&p, &inputs, None);
        let mut state = HiddenState::zeros(&p.config);
        let single = predict_step(&p, &mut state, &inputs[0]).unwrap();
        assert_eq!(out[0], single);
    }

    #[test]
    fn hidden_state_chaining_exact() {
        let mut rng = Seeded::new(5);
        let p = PolicyParams::init(tiny_config(), &mut rng);
        let inputs = tiny_inputs(20, 3);
        let (full, _) = forward(&p, &inputs, None);
        let (a, mid) = forward(&p, &inputs[..8], None);
        let (b, _) = forward(&p, &inputs[8..], Some(mid));
        for (t, o) in a.iter().chain(b.iter()).enumerate() {
            for (x, y) in o.iter().zip(full[t].iter()) {
                assert!((x - y).abs() <= 1e-12, "t={t}");
            }
        }
    }

    #[test]
    fn predict_step_rejects_non_finite() {
        let p = PolicyParams::zeros(tiny_config());
        let mut state = HiddenState::zeros(&p.config);
        assert!(predict_step(&p, &mut state, &[f64::NAN, 0.0, 0.0]).is_none());
    }

    #[test]
    fn loss_basics() {
        let o = alloc::vec![alloc::vec![1.0, 2.0], alloc::vec![3.0, 4.0]];
        assert_eq!(loss(&o, &o), 0.0);
        let shifted: Vec<Vec<f64>> = o.iter().map(|r| r.iter().map(|v| v + 0.5).collect()).collect();
        assert!((loss(&o, &shifted) - 0.25).abs() < 1e-15);
    }

    /// Forward pass against an independent scalar reimplementation written
    /// directly from the cell equations.
    #[test]
    fn forward_matches_scalar_oracle() {
        let cfg = tiny_config();
        let mut rng = Seeded::new(17);
        let p = PolicyParams::init(cfg, &mut rng);
        let inputs = tiny_inputs(7, 3);
        let (out, _) = forward(&p, &inputs, None);

        // oracle: explicit loops, explicit index arithmetic
        let h = cfg.hidden;
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let mut hs = alloc::vec![alloc::vec![0.0f64; h]; cfg.num_layers];
        let mut cs = alloc::vec![alloc::vec![0.0f64; h]; cfg.num_layers];
        for (t, input) in inputs.iter().enumerate() {
            let mut x = input.clone();
            let mut off = 0usize;
            for l in 0..cfg.num_layers {
                let in_d = if l == 0 { cfg.input_dim } else { h };
                let wx = &p.data[off..off + 4 * h * in_d];
                let wh = &p.data[off + 4 * h * in_d..off + 4 * h * in_d + 4 * h * h];
                let b = &p.data[off + 4 * h * in_d + 4 * h * h..off + 4 * h * in_d + 4 * h * h + 4 * h];
                let mut newh = alloc::vec![0.0f64; h];
                let mut newc = alloc::vec![0.0f64; h];
                for k in 0..h {
                    let mut zi = b[k];
                    let mut zf = b[h + k];
                    let mut zg = b[2 * h + k];
                    let mut zo = b[3 * h + k];
                    for d in 0..in_d {
                        zi += wx[k * in_d + d] * x[d];
                        zf += wx[(h + k) * in_d + d] * x[d];
                        zg += wx[(2 * h + k) * in_d + d] * x[d];
                        zo += wx[(3 * h + k) * in_d + d] * x[d];
                    }
                    for d in 0..h {
                        zi += wh[k * h + d] * hs[l][d];
                        zf += wh[(h + k) * h + d] * hs[l][d];
                        zg += wh[(2 * h + k) * h + d] * hs[l][d];
                        zo += wh[(3 * h + k) * h + d] * hs[l][d];
                    }
                    let (i, f, g, o) = (sig(zi), sig(zf), zg.tanh(), sig(zo));
                    newc[k] = f * cs[l][k] + i * g;
                    newh[k] = o * newc[k].tanh();
                }
                hs[l] = newh.clone();
                cs[l] = newc;
                x = newh;
                off += 4 * h * in_d + 4 * h * h + 4 * h;
            }
            for d in 0..cfg.output_dim {
                let mut y = p.data[off + cfg.output_dim * h + d];
                for k in 0..h {
                    y += p.data[off + d * h + k] * x[k];
                }
                assert!((y - out[t][d]).abs() <= 1e-12, "t={t} d={d}");
            }
        }
    }

    /// BPTT gradient against central finite differences, every parameter,
    /// 1e-4 relative tolerance.
    #[test]
    fn gradients_match_finite_differences() {
        let cfg = tiny_config();
        let mut rng = Seeded::new(23);
        let p = PolicyParams::init(cfg, &mut rng);
        let inputs = tiny_inputs(9, 3);
        let targets = tiny_inputs(9, 2);
        let mut grad = alloc::vec![0.0; cfg.param_len()];
        grad_sequence(&p, &inputs, &targets, &mut grad);

        let eps = 1e-6;
        for idx in 0..cfg.param_len() {
            let mut pp = p.clone();
            pp.data[idx] += eps;
            let (o1, _) = forward(&pp, &inputs, None);
            pp.data[idx] -= 2.0 * eps;
            let (o2, _) = forward(&pp, &inputs, None);
            let fd = (loss(&o1, &targets) - loss(&o2, &targets)) / (2.0 * eps);
            // relative check with an absolute floor for the finite-difference
            // noise on near-zero gradients
            let tol = 1e-4 * fd.abs().max(grad[idx].abs()) + 1e-9;
            assert!(
                (fd - grad[idx]).abs() <= tol,
                "param {idx}: fd={fd} bptt={}",
                grad[idx]
            );
        }
    }

    /// Windowed gradients sum across windows; loss itself is unchanged by
    /// the truncation.
    #[test]
    fn zero_error_zero_gradient() {
        let cfg = tiny_config();
        let mut rng = Seeded::new(29);
        let p = PolicyParams::init(cfg, &mut rng);
        let inputs = tiny_inputs(6, 3);
        let (targets, _) = forward(&p, &inputs, None);
        let mut grad = alloc::vec![0.0; cfg.param_len()];
        let l = grad_sequence(&p, &inputs, &targets, &mut grad);
        assert!(l < 1e-28);
        assert!(grad.iter().all(|g| g.abs() < 1e-12));
    }
}
