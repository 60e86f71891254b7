//! Windowed bidirectional LSTM producing the dense emission features `h_i`.
//!
//! Each position reads the concatenation of the (dropped-out) composed
//! inputs at `i-2..=i+2`, zero-padded past the sentence ends. The forward
//! and backward LSTMs share those windows; `h_i` is their concatenation.
//! Gates are stacked `[input; forget; output; candidate]` in the weight rows.

use ndarray::{s, Array1, Array2, ArrayView1, Zip};
use rand::Rng;

use crate::error::{Error, Result};

pub const WINDOW: usize = 5;
const HALF_WINDOW: isize = (WINDOW / 2) as isize;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `4H × input`
    pub w_input: Array2<f64>,
    /// `4H × H`
    pub w_hidden: Array2<f64>,
    /// `4H`
    pub bias: Array1<f64>,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_input: Array2::zeros((4 * hidden, input)),
            w_hidden: Array2::zeros((4 * hidden, hidden)),
            bias: Array1::zeros(4 * hidden),
        }
    }

    /// Uniform `[-r, r]` weights with `r = sqrt(6 / (fan_in + fan_out))`,
    /// forget-gate bias 1.
    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let r = (6.0 / (input + hidden + hidden) as f64).sqrt();
        let mut p = Self::zeros(input, hidden);
        p.w_input.mapv_inplace(|_| rng.random_range(-r..=r));
        p.w_hidden.mapv_inplace(|_| rng.random_range(-r..=r));
        p.bias.slice_mut(s![hidden..2 * hidden]).fill(1.0);
        p
    }

    pub fn hidden(&self) -> usize {
        self.w_hidden.ncols()
    }

    pub fn input(&self) -> usize {
        self.w_input.ncols()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input(), self.hidden())
    }

    pub fn is_finite(&self) -> bool {
        self.w_input.iter().chain(&self.w_hidden).chain(&self.bias).all(|v| v.is_finite())
    }

    pub fn squared_norm(&self) -> f64 {
        self.w_input
            .iter()
            .chain(&self.w_hidden)
            .chain(&self.bias)
            .map(|v| v * v)
            .sum()
    }

    fn add_assign(&mut self, other: &Self) {
        self.w_input += &other.w_input;
        self.w_hidden += &other.w_hidden;
        self.bias += &other.bias;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstm {
    pub forward: LstmParams,
    pub backward: LstmParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EncodeMode {
    /// Inverted dropout with drop probability `dropout` on composed inputs;
    /// activations are cached for [`BiLstm::backward`].
    Train { dropout: f64 },
    Infer,
}

#[derive(Debug, Clone)]
struct Step {
    h_prev: Array1<f64>,
    c_prev: Array1<f64>,
    i: Array1<f64>,
    f: Array1<f64>,
    o: Array1<f64>,
    g: Array1<f64>,
    tanh_c: Array1<f64>,
}

#[derive(Debug, Clone)]
struct Cache {
    /// Per-position multiplier (0 or 1/(1-p)); `None` without dropout.
    masks: Option<Vec<Array1<f64>>>,
    windows: Vec<Array1<f64>>,
    /// Indexed by position, not processing order.
    forward: Vec<Step>,
    backward: Vec<Step>,
}

#[derive(Debug, Clone)]
pub struct EncoderOutput {
    /// `h_i = forward_i ⊕ backward_i`, each of width `2H`.
    pub h: Vec<Array1<f64>>,
    cache: Option<Cache>,
}

impl EncoderOutput {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    /// Dropout multipliers used in the forward pass, if any.
    pub fn dropout_masks(&self) -> Option<&[Array1<f64>]> {
        self.cache.as_ref().and_then(|c| c.masks.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmGrads {
    pub forward: LstmParams,
    pub backward: LstmParams,
}

impl BiLstmGrads {
    pub fn add_assign(&mut self, other: &Self) {
        self.forward.add_assign(&other.forward);
        self.backward.add_assign(&other.backward);
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn lstm_step(p: &LstmParams, x: &Array1<f64>, h_prev: Array1<f64>, c_prev: Array1<f64>) -> (Step, Array1<f64>, Array1<f64>) {
    let hidden = p.hidden();
    let z = p.w_input.dot(x) + p.w_hidden.dot(&h_prev) + &p.bias;
    let i = z.slice(s![0..hidden]).mapv(sigmoid);
    let f = z.slice(s![hidden..2 * hidden]).mapv(sigmoid);
    let o = z.slice(s![2 * hidden..3 * hidden]).mapv(sigmoid);
    let g = z.slice(s![3 * hidden..]).mapv(f64::tanh);
    let c = &f * &c_prev + &i * &g;
    let tanh_c = c.mapv(f64::tanh);
    let h = &o * &tanh_c;
    (
        Step {
            h_prev,
            c_prev,
            i,
            f,
            o,
            g,
            tanh_c,
        },
        h,
        c,
    )
}

impl BiLstm {
    /// Randomly initialized encoder over composed inputs of width
    /// `token_dim`, with `hidden` units per direction.
    pub fn new<R: Rng>(token_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            forward: LstmParams::init(WINDOW * token_dim, hidden, rng),
            backward: LstmParams::init(WINDOW * token_dim, hidden, rng),
        }
    }

    pub fn zeros(token_dim: usize, hidden: usize) -> Self {
        Self {
            forward: LstmParams::zeros(WINDOW * token_dim, hidden),
            backward: LstmParams::zeros(WINDOW * token_dim, hidden),
        }
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    pub fn token_dim(&self) -> usize {
        self.forward.input() / WINDOW
    }

    pub fn output_dim(&self) -> usize {
        2 * self.hidden()
    }

    pub fn zero_grads(&self) -> BiLstmGrads {
        BiLstmGrads {
            forward: self.forward.zeros_like(),
            backward: self.backward.zeros_like(),
        }
    }

    fn windows(&self, inputs: &[Array1<f64>]) -> Vec<Array1<f64>> {
        let d = self.token_dim();
        let n = inputs.len() as isize;
        (0..n)
            .map(|t| {
                let mut w = Array1::zeros(WINDOW * d);
                for k in 0..WINDOW as isize {
                    let j = t + k - HALF_WINDOW;
                    if (0..n).contains(&j) {
                        w.slice_mut(s![k as usize * d..(k as usize + 1) * d])
                            .assign(&inputs[j as usize]);
                    }
                }
                w
            })
            .collect()
    }

    pub fn encode<R: Rng>(&self, inputs: &[Array1<f64>], mode: EncodeMode, rng: &mut R) -> Result<EncoderOutput> {
        if inputs.is_empty() {
            return Err(Error::InvalidArgument("cannot encode an empty sequence".into()));
        }
        let d = self.token_dim();
        if let Some(bad) = inputs.iter().find(|x| x.len() != d) {
            return Err(Error::Dimension(format!(
                "encoder expects inputs of width {d}, got {}",
                bad.len()
            )));
        }
        let masks = match mode {
            EncodeMode::Train { dropout } if dropout > 0.0 => {
                if !(0.0..1.0).contains(&dropout) {
                    return Err(Error::InvalidArgument(format!(
                        "dropout probability {dropout} outside [0, 1)"
                    )));
                }
                let keep = 1.0 - dropout;
                Some(
                    inputs
                        .iter()
                        .map(|x| {
                            Array1::from_shape_fn(x.len(), |_| {
                                if rng.random::<f64>() < keep {
                                    1.0 / keep
                                } else {
                                    0.0
                                }
                            })
                        })
                        .collect::<Vec<_>>(),
                )
            }
            _ => None,
        };
        let windows = match &masks {
            Some(m) => {
                let dropped: Vec<Array1<f64>> =
                    inputs.iter().zip(m).map(|(x, m)| x * m).collect();
                self.windows(&dropped)
            }
            None => self.windows(inputs),
        };

        let n = inputs.len();
        let hidden = self.hidden();
        let run = |p: &LstmParams, order: &mut dyn Iterator<Item = usize>| {
            let mut steps: Vec<Option<Step>> = vec![None; n];
            let mut hs: Vec<Array1<f64>> = vec![Array1::zeros(0); n];
            let (mut h, mut c) = (Array1::zeros(hidden), Array1::zeros(hidden));
            for t in order {
                let (step, h_next, c_next) = lstm_step(p, &windows[t], h, c);
                hs[t] = h_next.clone();
                steps[t] = Some(step);
                h = h_next;
                c = c_next;
            }
            (steps.into_iter().map(Option::unwrap).collect::<Vec<_>>(), hs)
        };
        let (fwd_steps, fwd_h) = run(&self.forward, &mut (0..n));
        let (bwd_steps, bwd_h) = run(&self.backward, &mut (0..n).rev());

        let h = fwd_h
            .iter()
            .zip(&bwd_h)
            .map(|(f, b)| ndarray::concatenate![ndarray::Axis(0), *f, *b])
            .collect();
        let cache = matches!(mode, EncodeMode::Train { .. }).then_some(Cache {
            masks,
            windows,
            forward: fwd_steps,
            backward: bwd_steps,
        });
        Ok(EncoderOutput { h, cache })
    }

    /// Gradients of a scalar loss w.r.t. all parameters and all composed
    /// inputs (pre-dropout), given `dL/dh_i` for every position.
    pub fn backward(&self, out: &EncoderOutput, dh: &[Array1<f64>]) -> Result<(BiLstmGrads, Vec<Array1<f64>>)> {
        let cache = out.cache.as_ref().ok_or(Error::MissingCache)?;
        let n = out.h.len();
        let hidden = self.hidden();
        if dh.len() != n || dh.iter().any(|g| g.len() != 2 * hidden) {
            return Err(Error::Dimension("upstream gradient shape".into()));
        }
        let mut grads = self.zero_grads();
        let mut dwindows: Vec<Array1<f64>> = vec![Array1::zeros(self.forward.input()); n];

        let mut run = |p: &LstmParams,
                       steps: &[Step],
                       g: &mut LstmParams,
                       range: std::ops::Range<usize>,
                       order: &mut dyn Iterator<Item = usize>| {
            let mut dh_next = Array1::<f64>::zeros(hidden);
            let mut dc_next = Array1::<f64>::zeros(hidden);
            let mut dz = Array1::<f64>::zeros(4 * hidden);
            for t in order {
                let st = &steps[t];
                let dh_t = &dh[t].slice(s![range.clone()]) + &dh_next;
                let mut dc = dc_next.clone();
                Zip::from(&mut dc)
                    .and(&dh_t)
                    .and(&st.o)
                    .and(&st.tanh_c)
                    .for_each(|dc, &dh, &o, &tc| *dc += dh * o * (1.0 - tc * tc));
                for k in 0..hidden {
                    let (i, f, o, gg) = (st.i[k], st.f[k], st.o[k], st.g[k]);
                    dz[k] = dc[k] * gg * i * (1.0 - i);
                    dz[hidden + k] = dc[k] * st.c_prev[k] * f * (1.0 - f);
                    dz[2 * hidden + k] = dh_t[k] * st.tanh_c[k] * o * (1.0 - o);
                    dz[3 * hidden + k] = dc[k] * i * (1.0 - gg * gg);
                }
                let x = &cache.windows[t];
                g.w_input += &outer(dz.view(), x.view());
                g.w_hidden += &outer(dz.view(), st.h_prev.view());
                g.bias += &dz;
                dwindows[t] += &p.w_input.t().dot(&dz);
                dh_next = p.w_hidden.t().dot(&dz);
                dc_next = &dc * &st.f;
            }
        };
        run(
            &self.forward,
            &cache.forward,
            &mut grads.forward,
            0..hidden,
            &mut (0..n).rev(),
        );
        run(
            &self.backward,
            &cache.backward,
            &mut grads.backward,
            hidden..2 * hidden,
            &mut (0..n),
        );

        let d = self.token_dim();
        let mut dinputs: Vec<Array1<f64>> = vec![Array1::zeros(d); n];
        for (t, dw) in dwindows.iter().enumerate() {
            for k in 0..WINDOW as isize {
                let j = t as isize + k - HALF_WINDOW;
                if (0..n as isize).contains(&j) {
                    dinputs[j as usize] += &dw.slice(s![k as usize * d..(k as usize + 1) * d]);
                }
            }
        }
        if let Some(masks) = &cache.masks {
            for (dx, m) in dinputs.iter_mut().zip(masks) {
                *dx *= m;
            }
        }
        Ok((grads, dinputs))
    }
}

fn outer(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Array2<f64> {
    let a2 = a.insert_axis(ndarray::Axis(1));
    let b2 = b.insert_axis(ndarray::Axis(0));
    a2.dot(&b2)
}
