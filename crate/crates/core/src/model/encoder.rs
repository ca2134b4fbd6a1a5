use super::lstm::{scan, scan_hidden, step_backward, LstmDirectionParams, PeepholeMode, StepTrace};
use crate::numkit::{axpy, init_matrix, InitMode, Matrix, SeededRng};

/// Embedding scale for source words.
pub const EMBEDDING_INIT_RANGE: f64 = 0.08;

/// Source-word lookup table, `|V_src| × d`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub table: Matrix,
}

impl EmbeddingTable {
    pub fn init(vocab_size: usize, dim: usize, rng: &mut SeededRng) -> Self {
        EmbeddingTable { table: init_matrix(vocab_size, dim, InitMode::Uniform(EMBEDDING_INIT_RANGE), rng) }
    }

    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        EmbeddingTable { table: Matrix::zeros(vocab_size, dim) }
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    pub fn vocab_size(&self) -> usize {
        self.table.rows()
    }

    #[inline]
    pub fn lookup(&self, id: u32) -> &[f64] {
        assert!(
            (id as usize) < self.table.rows(),
            "token id {id} outside embedding table of {} rows",
            self.table.rows()
        );
        self.table.row(id as usize)
    }

    pub(crate) fn add_to_row(&mut self, id: u32, delta: &[f64]) {
        axpy(1.0, delta, self.table.row_mut(id as usize));
    }
}

/// Backpropagates one direction whose final processed step received `dh`.
/// `ids` are in processing order.
fn direction_backward(
    params: &LstmDirectionParams,
    embeddings: &EmbeddingTable,
    ids: &[u32],
    traces: &[StepTrace],
    dh: &[f64],
    grads: &mut LstmDirectionParams,
    emb_grads: &mut EmbeddingTable,
) {
    debug_assert_eq!(ids.len(), traces.len());
    let n = params.hidden_dim();
    let d = embeddings.dim();
    let mut dh_next = dh.to_vec();
    let mut dc_next = vec![0.0; n];
    let mut dx = vec![0.0; d];
    for k in (0..traces.len()).rev() {
        let x = embeddings.lookup(ids[k]);
        dx.iter_mut().for_each(|v| *v = 0.0);
        let (dh_prev, dc_prev) = step_backward(params, x, &traces[k], &dh_next, &dc_next, grads, &mut dx);
        emb_grads.add_to_row(ids[k], &dx);
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
}

/// Bidirectional encoder: one embedding table, two independent directions.
#[derive(Clone, Debug, PartialEq)]
pub struct BiLstmEncoder {
    pub embeddings: EmbeddingTable,
    pub forward: LstmDirectionParams,
    pub backward: LstmDirectionParams,
}

pub(crate) struct BiTrace {
    fwd: Vec<StepTrace>,
    bwd: Vec<StepTrace>,
}

impl BiLstmEncoder {
    pub fn init(vocab_size: usize, dim: usize, hidden: usize, peephole: PeepholeMode, rng: &mut SeededRng) -> Self {
        let embeddings = EmbeddingTable::init(vocab_size, dim, rng);
        let forward = LstmDirectionParams::init(dim, hidden, peephole, rng);
        let backward = LstmDirectionParams::init(dim, hidden, peephole, rng);
        BiLstmEncoder { embeddings, forward, backward }
    }

    pub fn hidden_dim(&self) -> usize {
        self.forward.hidden_dim()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.hidden_dim()
    }

    /// Context vectors `[→h_t ; ←h_t]` for every position.
    pub fn encode(&self, ids: &[u32]) -> Vec<Vec<f64>> {
        assert!(!ids.is_empty(), "cannot encode an empty sentence");
        let fwd = scan_hidden(&self.forward, ids.iter().map(|&id| self.embeddings.lookup(id)));
        let mut bwd = scan_hidden(&self.backward, ids.iter().rev().map(|&id| self.embeddings.lookup(id)));
        bwd.reverse();
        fwd.into_iter()
            .zip(bwd)
            .map(|(mut f, b)| {
                f.extend_from_slice(&b);
                f
            })
            .collect()
    }

    /// Context vector at `t`; each direction only runs as far as `t`.
    pub(crate) fn encode_at(&self, ids: &[u32], t: usize) -> (Vec<f64>, BiTrace) {
        assert!(t < ids.len(), "position {t} outside sentence of length {}", ids.len());
        let fwd = scan(&self.forward, ids[..=t].iter().map(|&id| self.embeddings.lookup(id)));
        let bwd = scan(&self.backward, ids[t..].iter().rev().map(|&id| self.embeddings.lookup(id)));
        let mut h = fwd.last().expect("non-empty").h.clone();
        h.extend_from_slice(&bwd.last().expect("non-empty").h);
        (h, BiTrace { fwd, bwd })
    }

    pub(crate) fn backprop(&self, ids: &[u32], t: usize, trace: &BiTrace, dh: &[f64], grads: &mut BiLstmEncoder) {
        let n = self.hidden_dim();
        direction_backward(
            &self.forward,
            &self.embeddings,
            &ids[..=t],
            &trace.fwd,
            &dh[..n],
            &mut grads.forward,
            &mut grads.embeddings,
        );
        let rev: Vec<u32> = ids[t..].iter().rev().copied().collect();
        direction_backward(
            &self.backward,
            &self.embeddings,
            &rev,
            &trace.bwd,
            &dh[n..],
            &mut grads.backward,
            &mut grads.embeddings,
        );
    }
}

/// Left-to-right only encoder; its hidden size is twice the per-direction
/// size of the bidirectional model, so both produce equally wide vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardLstmEncoder {
    pub embeddings: EmbeddingTable,
    pub forward: LstmDirectionParams,
}

impl ForwardLstmEncoder {
    pub fn init(vocab_size: usize, dim: usize, hidden: usize, peephole: PeepholeMode, rng: &mut SeededRng) -> Self {
        let embeddings = EmbeddingTable::init(vocab_size, dim, rng);
        let forward = LstmDirectionParams::init(dim, 2 * hidden, peephole, rng);
        let enc = ForwardLstmEncoder { embeddings, forward };
        assert_eq!(enc.output_dim(), 2 * hidden);
        enc
    }

    pub fn output_dim(&self) -> usize {
        self.forward.hidden_dim()
    }

    pub fn encode(&self, ids: &[u32]) -> Vec<Vec<f64>> {
        assert!(!ids.is_empty(), "cannot encode an empty sentence");
        scan_hidden(&self.forward, ids.iter().map(|&id| self.embeddings.lookup(id)))
    }

    pub(crate) fn encode_at(&self, ids: &[u32], t: usize) -> (Vec<f64>, Vec<StepTrace>) {
        assert!(t < ids.len(), "position {t} outside sentence of length {}", ids.len());
        let fwd = scan(&self.forward, ids[..=t].iter().map(|&id| self.embeddings.lookup(id)));
        (fwd.last().expect("non-empty").h.clone(), fwd)
    }

    pub(crate) fn backprop(
        &self,
        ids: &[u32],
        t: usize,
        trace: &[StepTrace],
        dh: &[f64],
        grads: &mut ForwardLstmEncoder,
    ) {
        direction_backward(
            &self.forward,
            &self.embeddings,
            &ids[..=t],
            trace,
            dh,
            &mut grads.forward,
            &mut grads.embeddings,
        );
    }
}
