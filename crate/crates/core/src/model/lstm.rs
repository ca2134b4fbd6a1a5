use serde::{Deserialize, Serialize};

use crate::numkit::{init_matrix, sigmoid, InitMode, Matrix, SeededRng};

/// How the cell-state ("peephole") terms enter the gates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeepholeMode {
    /// `W_c* · c` with full `d_h × d_h` matrices.
    #[default]
    Full,
    /// Elementwise `w_c* ⊙ c`; the weights are stored as `d_h × 1` matrices.
    Diagonal,
}

impl std::str::FromStr for PeepholeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(PeepholeMode::Full),
            "diagonal" => Ok(PeepholeMode::Diagonal),
            other => Err(format!("unknown peephole mode `{other}` (expected full or diagonal)")),
        }
    }
}

/// Parameters of one LSTM direction.
///
/// Input-facing matrices are `d_h × d`; recurrent and full peephole matrices
/// are `d_h × d_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmDirectionParams {
    pub peephole: PeepholeMode,
    pub w_xi: Matrix,
    pub w_hi: Matrix,
    pub w_ci: Matrix,
    pub w_xf: Matrix,
    pub w_hf: Matrix,
    pub w_cf: Matrix,
    pub w_xc: Matrix,
    pub w_hc: Matrix,
    pub w_xo: Matrix,
    pub w_ho: Matrix,
    pub w_co: Matrix,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
}

impl LstmDirectionParams {
    pub fn zeros(input: usize, hidden: usize, peephole: PeepholeMode) -> Self {
        let peep = || match peephole {
            PeepholeMode::Full => Matrix::zeros(hidden, hidden),
            PeepholeMode::Diagonal => Matrix::zeros(hidden, 1),
        };
        LstmDirectionParams {
            peephole,
            w_xi: Matrix::zeros(hidden, input),
            w_hi: Matrix::zeros(hidden, hidden),
            w_ci: peep(),
            w_xf: Matrix::zeros(hidden, input),
            w_hf: Matrix::zeros(hidden, hidden),
            w_cf: peep(),
            w_xc: Matrix::zeros(hidden, input),
            w_hc: Matrix::zeros(hidden, hidden),
            w_xo: Matrix::zeros(hidden, input),
            w_ho: Matrix::zeros(hidden, hidden),
            w_co: peep(),
            b_i: vec![0.0; hidden],
            b_f: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        }
    }

    /// Input weights Glorot-uniform; recurrent and full peephole matrices
    /// orthogonal; diagonal peepholes and biases zero.
    pub fn init(input: usize, hidden: usize, peephole: PeepholeMode, rng: &mut SeededRng) -> Self {
        let mut p = Self::zeros(input, hidden, peephole);
        let ortho = |rng: &mut SeededRng| init_matrix(hidden, hidden, InitMode::Orthogonal, rng);
        let glorot = |rng: &mut SeededRng| init_matrix(hidden, input, InitMode::Glorot, rng);
        let peep = |rng: &mut SeededRng| match peephole {
            PeepholeMode::Full => init_matrix(hidden, hidden, InitMode::Orthogonal, rng),
            PeepholeMode::Diagonal => Matrix::zeros(hidden, 1),
        };
        p.w_xi = glorot(rng);
        p.w_hi = ortho(rng);
        p.w_ci = peep(rng);
        p.w_xf = glorot(rng);
        p.w_hf = ortho(rng);
        p.w_cf = peep(rng);
        p.w_xc = glorot(rng);
        p.w_hc = ortho(rng);
        p.w_xo = glorot(rng);
        p.w_ho = ortho(rng);
        p.w_co = peep(rng);
        p
    }

    pub fn hidden_dim(&self) -> usize {
        self.b_i.len()
    }

    pub fn input_dim(&self) -> usize {
        self.w_xi.cols()
    }

    pub(crate) fn tensors(&self) -> [(&'static str, &[f64]); 15] {
        [
            ("w_xi", self.w_xi.as_slice()),
            ("w_hi", self.w_hi.as_slice()),
            ("w_ci", self.w_ci.as_slice()),
            ("w_xf", self.w_xf.as_slice()),
            ("w_hf", self.w_hf.as_slice()),
            ("w_cf", self.w_cf.as_slice()),
            ("w_xc", self.w_xc.as_slice()),
            ("w_hc", self.w_hc.as_slice()),
            ("w_xo", self.w_xo.as_slice()),
            ("w_ho", self.w_ho.as_slice()),
            ("w_co", self.w_co.as_slice()),
            ("b_i", &self.b_i),
            ("b_f", &self.b_f),
            ("b_c", &self.b_c),
            ("b_o", &self.b_o),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> [(&'static str, &mut [f64]); 15] {
        [
            ("w_xi", self.w_xi.as_mut_slice()),
            ("w_hi", self.w_hi.as_mut_slice()),
            ("w_ci", self.w_ci.as_mut_slice()),
            ("w_xf", self.w_xf.as_mut_slice()),
            ("w_hf", self.w_hf.as_mut_slice()),
            ("w_cf", self.w_cf.as_mut_slice()),
            ("w_xc", self.w_xc.as_mut_slice()),
            ("w_hc", self.w_hc.as_mut_slice()),
            ("w_xo", self.w_xo.as_mut_slice()),
            ("w_ho", self.w_ho.as_mut_slice()),
            ("w_co", self.w_co.as_mut_slice()),
            ("b_i", &mut self.b_i),
            ("b_f", &mut self.b_f),
            ("b_c", &mut self.b_c),
            ("b_o", &mut self.b_o),
        ]
    }

    fn check(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) {
        let dh = self.hidden_dim();
        assert_eq!(x.len(), self.input_dim(), "lstm: input length {} != {}", x.len(), self.input_dim());
        assert_eq!(h_prev.len(), dh, "lstm: h_prev length mismatch");
        assert_eq!(c_prev.len(), dh, "lstm: c_prev length mismatch");
    }
}

#[inline]
fn peep_acc(mode: PeepholeMode, w: &Matrix, c: &[f64], out: &mut [f64]) {
    match mode {
        PeepholeMode::Full => w.matvec_acc(c, out),
        PeepholeMode::Diagonal => {
            for ((o, &wk), &ck) in out.iter_mut().zip(w.as_slice()).zip(c) {
                *o += wk * ck;
            }
        }
    }
}

#[inline]
fn peep_t_acc(mode: PeepholeMode, w: &Matrix, da: &[f64], out: &mut [f64]) {
    match mode {
        PeepholeMode::Full => w.matvec_t_acc(da, out),
        PeepholeMode::Diagonal => {
            for ((o, &wk), &dk) in out.iter_mut().zip(w.as_slice()).zip(da) {
                *o += wk * dk;
            }
        }
    }
}

#[inline]
fn peep_grad(mode: PeepholeMode, gw: &mut Matrix, da: &[f64], c: &[f64]) {
    match mode {
        PeepholeMode::Full => gw.outer_acc(da, c),
        PeepholeMode::Diagonal => {
            for ((g, &dk), &ck) in gw.as_mut_slice().iter_mut().zip(da).zip(c) {
                *g += dk * ck;
            }
        }
    }
}

/// Everything one step needs for backpropagation.
#[derive(Clone, Debug)]
pub(crate) struct StepTrace {
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn step_traced(p: &LstmDirectionParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepTrace {
    p.check(x, h_prev, c_prev);
    let mode = p.peephole;

    let mut a_i = p.b_i.clone();
    p.w_xi.matvec_acc(x, &mut a_i);
    p.w_hi.matvec_acc(h_prev, &mut a_i);
    peep_acc(mode, &p.w_ci, c_prev, &mut a_i);
    let i: Vec<f64> = a_i.iter().map(|&v| sigmoid(v)).collect();

    let mut a_f = p.b_f.clone();
    p.w_xf.matvec_acc(x, &mut a_f);
    p.w_hf.matvec_acc(h_prev, &mut a_f);
    peep_acc(mode, &p.w_cf, c_prev, &mut a_f);
    let f: Vec<f64> = a_f.iter().map(|&v| sigmoid(v)).collect();

    let mut a_g = p.b_c.clone();
    p.w_xc.matvec_acc(x, &mut a_g);
    p.w_hc.matvec_acc(h_prev, &mut a_g);
    let g: Vec<f64> = a_g.iter().map(|v| v.tanh()).collect();

    let c: Vec<f64> = (0..i.len()).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();

    // The output gate reads the updated cell.
    let mut a_o = p.b_o.clone();
    p.w_xo.matvec_acc(x, &mut a_o);
    p.w_ho.matvec_acc(h_prev, &mut a_o);
    peep_acc(mode, &p.w_co, &c, &mut a_o);
    let o: Vec<f64> = a_o.iter().map(|&v| sigmoid(v)).collect();

    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = o.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();

    StepTrace { h_prev: h_prev.to_vec(), c_prev: c_prev.to_vec(), i, f, g, o, c, tanh_c, h }
}

/// One LSTM step; returns `(h_t, c_t)`.
pub fn lstm_step(p: &LstmDirectionParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let t = step_traced(p, x, h_prev, c_prev);
    (t.h, t.c)
}

/// Backward through one step. `dh` and `dc_next` are the gradients reaching
/// `h_t` and `c_t` from above and from the following step. Accumulates
/// parameter gradients into `grads` and the input gradient into `dx`, and
/// returns the gradients for `(h_{t-1}, c_{t-1})`.
pub(crate) fn step_backward(
    p: &LstmDirectionParams,
    x: &[f64],
    tr: &StepTrace,
    dh: &[f64],
    dc_next: &[f64],
    grads: &mut LstmDirectionParams,
    dx: &mut [f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = tr.h.len();
    let mode = p.peephole;

    let mut da_o = vec![0.0; n];
    let mut dc = dc_next.to_vec();
    for k in 0..n {
        let d_o = dh[k] * tr.tanh_c[k];
        da_o[k] = d_o * tr.o[k] * (1.0 - tr.o[k]);
        dc[k] += dh[k] * tr.o[k] * (1.0 - tr.tanh_c[k] * tr.tanh_c[k]);
    }
    peep_t_acc(mode, &p.w_co, &da_o, &mut dc);

    let mut da_i = vec![0.0; n];
    let mut da_f = vec![0.0; n];
    let mut da_g = vec![0.0; n];
    let mut dc_prev = vec![0.0; n];
    for k in 0..n {
        da_i[k] = dc[k] * tr.g[k] * tr.i[k] * (1.0 - tr.i[k]);
        da_g[k] = dc[k] * tr.i[k] * (1.0 - tr.g[k] * tr.g[k]);
        da_f[k] = dc[k] * tr.c_prev[k] * tr.f[k] * (1.0 - tr.f[k]);
        dc_prev[k] = dc[k] * tr.f[k];
    }
    peep_t_acc(mode, &p.w_ci, &da_i, &mut dc_prev);
    peep_t_acc(mode, &p.w_cf, &da_f, &mut dc_prev);

    let mut dh_prev = vec![0.0; n];
    p.w_hi.matvec_t_acc(&da_i, &mut dh_prev);
    p.w_hf.matvec_t_acc(&da_f, &mut dh_prev);
    p.w_hc.matvec_t_acc(&da_g, &mut dh_prev);
    p.w_ho.matvec_t_acc(&da_o, &mut dh_prev);

    p.w_xi.matvec_t_acc(&da_i, dx);
    p.w_xf.matvec_t_acc(&da_f, dx);
    p.w_xc.matvec_t_acc(&da_g, dx);
    p.w_xo.matvec_t_acc(&da_o, dx);

    grads.w_xi.outer_acc(&da_i, x);
    grads.w_xf.outer_acc(&da_f, x);
    grads.w_xc.outer_acc(&da_g, x);
    grads.w_xo.outer_acc(&da_o, x);
    grads.w_hi.outer_acc(&da_i, &tr.h_prev);
    grads.w_hf.outer_acc(&da_f, &tr.h_prev);
    grads.w_hc.outer_acc(&da_g, &tr.h_prev);
    grads.w_ho.outer_acc(&da_o, &tr.h_prev);
    peep_grad(mode, &mut grads.w_ci, &da_i, &tr.c_prev);
    peep_grad(mode, &mut grads.w_cf, &da_f, &tr.c_prev);
    peep_grad(mode, &mut grads.w_co, &da_o, &tr.c);
    for k in 0..n {
        grads.b_i[k] += da_i[k];
        grads.b_f[k] += da_f[k];
        grads.b_c[k] += da_g[k];
        grads.b_o[k] += da_o[k];
    }

    (dh_prev, dc_prev)
}

/// Runs the cell over `xs` from a zero state, keeping every step's trace.
pub(crate) fn scan<'a>(p: &LstmDirectionParams, xs: impl Iterator<Item = &'a [f64]>) -> Vec<StepTrace> {
    let n = p.hidden_dim();
    let mut traces: Vec<StepTrace> = Vec::new();
    let zero = vec![0.0; n];
    for x in xs {
        let (h_prev, c_prev) = match traces.last() {
            Some(t) => (t.h.as_slice(), t.c.as_slice()),
            None => (zero.as_slice(), zero.as_slice()),
        };
        let t = step_traced(p, x, h_prev, c_prev);
        traces.push(t);
    }
    traces
}

/// Like [`scan`] but only keeps the hidden states.
pub(crate) fn scan_hidden<'a>(p: &LstmDirectionParams, xs: impl Iterator<Item = &'a [f64]>) -> Vec<Vec<f64>> {
    let n = p.hidden_dim();
    let mut h = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut out = Vec::new();
    for x in xs {
        let (h2, c2) = lstm_step(p, x, &h, &c);
        out.push(h2.clone());
        h = h2;
        c = c2;
    }
    out
}
