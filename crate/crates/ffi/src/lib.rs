//! C interface to `epa-core`.
//!
//! Every function returns an [`EpaStatus`]; results go through out-pointers.
//! On failure, [`epa_last_error_message`] describes the error for the
//! calling thread. Graphs and datasets are opaque handles released with
//! their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use epa_core::contrastive::{nt_xent_loss, simsiam_loss, Embedding, LossConfig};
use epa_core::graph::{count_simple_cycles, cycle_distance, Graph};
use epa_core::io::{read_dataset, write_dataset};
use epa_core::synth::{generate, DatasetSpec, LabeledExample, Variant};
use epa_core::theory::{brute_force_omega, expected_omega, Channel};
use epa_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGraph = 3,
    Io = 4,
    Parse = 5,
    Compute = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpaChannel {
    SemanticAgnostic = 0,
    SemanticPreserving = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpaVariant {
    Modified = 0,
    Original = 1,
}

/// An undirected graph.
pub struct EpaGraph(Graph);

/// A list of labelled graphs with explanation masks.
pub struct EpaDataset(Vec<LabeledExample>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EpaStatus {
    match e {
        Error::SelfLoop { .. }
        | Error::DuplicateEdge { .. }
        | Error::IndexOutOfRange { .. }
        | Error::FeatureShapeMismatch { .. }
        | Error::InvalidMask { .. }
        | Error::EmptyGraph => EpaStatus::InvalidGraph,
        Error::Io(_) => EpaStatus::Io,
        Error::Parse { .. } | Error::Csv(_) => EpaStatus::Parse,
        Error::InvalidParameters(_)
        | Error::LengthMismatch { .. }
        | Error::DimensionMismatch { .. }
        | Error::ZeroNormEmbedding { .. }
        | Error::NonFiniteEmbedding
        | Error::EmptyInput => EpaStatus::InvalidArgument,
        _ => EpaStatus::Compute,
    }
}

/// Runs `f`, recording any error or panic for `epa_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), (EpaStatus, String)>) -> EpaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EpaStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            EpaStatus::Panic
        }
    }
}

fn core<T>(r: epa_core::Result<T>) -> Result<T, (EpaStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (EpaStatus, String) {
    (EpaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, (EpaStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| (EpaStatus::InvalidArgument, "path is not UTF-8".into()))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (EpaStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the most recent failed call on this thread, or null. The
/// pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn epa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a graph from `num_edges` pairs stored flat in `edges`
/// (`u0, v0, u1, v1, ...`).
///
/// # Safety
/// `edges` must point to `2 * num_edges` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_graph_new(
    num_nodes: usize,
    edges: *const usize,
    num_edges: usize,
    out: *mut *mut EpaGraph,
) -> EpaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let flat = slice_arg(edges, 2 * num_edges, "edges")?;
        let g = core(Graph::new(num_nodes, flat.chunks(2).map(|c| (c[0], c[1])), None, None))?;
        *out = Box::into_raw(Box::new(EpaGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn epa_graph_free(g: *mut EpaGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live graph handle; `nodes` and `edges` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_graph_size(g: *const EpaGraph, nodes: *mut usize, edges: *mut usize) -> EpaStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        if nodes.is_null() || edges.is_null() {
            return Err(null("out"));
        }
        *nodes = g.0.num_nodes();
        *edges = g.0.num_edges();
        Ok(())
    })
}

/// Number of simple cycles.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_graph_count_cycles(g: *const EpaGraph, out: *mut u64) -> EpaStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = core(count_simple_cycles(&g.0))?;
        Ok(())
    })
}

/// Absolute difference of the two graphs' simple-cycle counts.
///
/// # Safety
/// `a` and `b` must be live graph handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_cycle_distance(a: *const EpaGraph, b: *const EpaGraph, out: *mut u64) -> EpaStatus {
    guard(|| {
        let (a, b) = (a.as_ref().ok_or_else(|| null("a"))?, b.as_ref().ok_or_else(|| null("b"))?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = core(cycle_distance(&a.0, &b.0))?;
        Ok(())
    })
}

/// Generates a BA-2motifs dataset.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_dataset_generate(
    n_graphs: usize,
    q: f64,
    base_nodes: usize,
    seed: u64,
    variant: EpaVariant,
    out: *mut *mut EpaDataset,
) -> EpaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = DatasetSpec {
            n_graphs,
            q,
            base_nodes,
            seed,
            variant: match variant {
                EpaVariant::Modified => Variant::Modified,
                EpaVariant::Original => Variant::Original,
            },
        };
        let data = core(generate(&spec))?;
        *out = Box::into_raw(Box::new(EpaDataset(data)));
        Ok(())
    })
}

/// Reads a JSON-lines dataset.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_dataset_read(path: *const c_char, out: *mut *mut EpaDataset) -> EpaStatus {
    guard(|| {
        let path = path_arg(path)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let data = core(read_dataset(path))?;
        *out = Box::into_raw(Box::new(EpaDataset(data)));
        Ok(())
    })
}

/// Writes a dataset as JSON lines.
///
/// # Safety
/// `ds` must be a live dataset handle; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn epa_dataset_write(ds: *const EpaDataset, path: *const c_char) -> EpaStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        core(write_dataset(&ds.0, path_arg(path)?))
    })
}

/// # Safety
/// `ds` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn epa_dataset_free(ds: *mut EpaDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_dataset_len(ds: *const EpaDataset, out: *mut usize) -> EpaStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = ds.0.len();
        Ok(())
    })
}

/// Copies graph `index` into a new handle and stores its label.
///
/// # Safety
/// `ds` must be a live dataset handle; `graph` and `label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_dataset_get(
    ds: *const EpaDataset,
    index: usize,
    graph: *mut *mut EpaGraph,
    label: *mut u32,
) -> EpaStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        if graph.is_null() || label.is_null() {
            return Err(null("out"));
        }
        let ex = ds.0.get(index).ok_or_else(|| {
            (
                EpaStatus::InvalidArgument,
                format!("index {index} out of range for {} graphs", ds.0.len()),
            )
        })?;
        *graph = Box::into_raw(Box::new(EpaGraph(ex.graph.clone())));
        *label = ex.label;
        Ok(())
    })
}

fn channel(c: EpaChannel) -> Channel {
    match c {
        EpaChannel::SemanticAgnostic => Channel::SemanticAgnostic,
        EpaChannel::SemanticPreserving => Channel::SemanticPreserving,
    }
}

unsafe fn write_table(values: &[[f64; 3]; 3], out: *mut f64) -> Result<(), (EpaStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let out = std::slice::from_raw_parts_mut(out, 9);
    for (dst, src) in out.iter_mut().zip(values.iter().flatten()) {
        *dst = *src;
    }
    Ok(())
}

/// Closed-form pair table, row-major over cycle classes (0, 1, 3).
///
/// # Safety
/// `out` must point to 9 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn epa_expected_omega(p: f64, q: f64, ch: EpaChannel, out: *mut f64) -> EpaStatus {
    guard(|| {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err((EpaStatus::InvalidArgument, "p and q must lie in [0, 1]".into()));
        }
        write_table(expected_omega(p, q, channel(ch)).values(), out)
    })
}

/// Enumerated pair table, same layout as [`epa_expected_omega`].
///
/// # Safety
/// `out` must point to 9 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn epa_brute_force_omega(p: f64, q: f64, ch: EpaChannel, out: *mut f64) -> EpaStatus {
    guard(|| {
        let t = core(brute_force_omega(p, q, channel(ch)))?;
        write_table(t.values(), out)
    })
}

unsafe fn rows(p: *const f64, n: usize, dim: usize, what: &str) -> Result<Vec<Embedding>, (EpaStatus, String)> {
    let flat = slice_arg(p, n * dim, what)?;
    flat.chunks(dim.max(1))
        .take(n)
        .map(|r| core(Embedding::new(r.to_vec())))
        .collect()
}

/// Mean NT-Xent loss over `n` view pairs stored row-major (`n x dim`).
///
/// # Safety
/// `z1` and `z2` must each point to `n * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_nt_xent(
    z1: *const f64,
    z2: *const f64,
    n: usize,
    dim: usize,
    temperature: f64,
    out: *mut f64,
) -> EpaStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if dim == 0 {
            return Err((EpaStatus::InvalidArgument, "dim must be positive".into()));
        }
        let (a, b) = (rows(z1, n, dim, "z1")?, rows(z2, n, dim, "z2")?);
        *out = core(nt_xent_loss(&a, &b, &LossConfig { temperature }))?.mean;
        Ok(())
    })
}

/// SimSiam loss of one quadruple of `dim`-vectors.
///
/// # Safety
/// Each input must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epa_simsiam(
    p1: *const f64,
    p2: *const f64,
    z1: *const f64,
    z2: *const f64,
    dim: usize,
    out: *mut f64,
) -> EpaStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = |p, what| -> Result<Embedding, (EpaStatus, String)> {
            core(Embedding::new(slice_arg(p, dim, what)?.to_vec()))
        };
        *out = core(simsiam_loss(&v(p1, "p1")?, &v(p2, "p2")?, &v(z1, "z1")?, &v(z2, "z2")?))?;
        Ok(())
    })
}
