//! JSON file formats for dense tensors, rank tuples and tree tensors.
//!
//! Documents are built as [`serde_json::Value`] trees, whose maps keep keys
//! sorted, and printed compactly with a trailing newline. Floats use the
//! shortest representation that reads back to the same value, so
//! write → read → write is byte-identical.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::dense::DenseTensor;
use crate::dtree::{DimensionTree, Vertex};
use crate::error::{Error, Result};
use crate::minsub::RankTuple;
use crate::real::Real;
use crate::ttn::TreeTensor;

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse {
        offset: 0,
        message: msg.into(),
    }
}

fn num<T: Real>(x: T) -> Value {
    Value::from(x.as_f64())
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| bad(format!("missing field {key:?}")))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(format!("{what} must be an object")))
}

fn as_usize_list(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} must be an array")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| bad(format!("{what} must hold non-negative integers")))
        })
        .collect()
}

fn as_scalars<T: Real>(v: &Value, what: &str) -> Result<Vec<T>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} must be an array")))?
        .iter()
        .enumerate()
        .map(|(i, x)| match x.as_f64() {
            Some(f) if f.is_finite() => Ok(T::of(f)),
            Some(_) => Err(Error::NonFinite(i)),
            None => Err(bad(format!("{what}[{i}] is not a number"))),
        })
        .collect()
}

/// Compact JSON plus a trailing newline.
pub fn to_string(v: &Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

fn array_json<T: Real>(t: &DenseTensor<T>) -> Value {
    json!({
        "shape": t.shape(),
        "values": t.values().iter().map(|&x| num(x)).collect::<Vec<_>>(),
    })
}

fn array_from_json<T: Real>(v: &Value, what: &str) -> Result<DenseTensor<T>> {
    let obj = as_object(v, what)?;
    let shape = as_usize_list(field(obj, "shape")?, "shape")?;
    let values = as_scalars(field(obj, "values")?, "values")?;
    DenseTensor::with_shape(shape, values)
}

pub fn dense_to_json<T: Real>(t: &DenseTensor<T>) -> Value {
    array_json(t)
}

pub fn dense_from_json<T: Real>(v: &Value) -> Result<DenseTensor<T>> {
    let t: DenseTensor<T> = array_from_json(v, "dense tensor")?;
    DenseTensor::new(t.shape().to_vec(), t.into_values())
}

fn rank_object(r: &RankTuple) -> Value {
    Value::Object(r.iter().map(|(_, v, k)| (v.key(), Value::from(k))).collect())
}

fn ranks_from_object(tree: &DimensionTree, v: &Value) -> Result<RankTuple> {
    let obj = v.as_object().ok_or_else(|| Error::MalformedRanks("ranks must be an object".into()))?;
    let mut ranks = vec![None; tree.len()];
    for (key, val) in obj {
        let vertex = Vertex::parse_key(key).map_err(|_| Error::MalformedRanks(format!("bad vertex key {key:?}")))?;
        let id = tree
            .node_of(&vertex)
            .ok_or_else(|| Error::MalformedRanks(format!("{vertex} is not a vertex of {tree}")))?;
        let r = val
            .as_u64()
            .ok_or_else(|| Error::MalformedRanks(format!("rank at {vertex} is not a non-negative integer")))?;
        ranks[id] = Some(r as usize);
    }
    let ranks = ranks
        .into_iter()
        .enumerate()
        .map(|(id, r)| r.ok_or_else(|| Error::MalformedRanks(format!("no rank given for vertex {}", tree.vertex(id)))))
        .collect::<Result<Vec<_>>>()?;
    RankTuple::new(tree.clone(), ranks)
}

pub fn ranks_to_json(r: &RankTuple) -> Value {
    json!({ "ranks": rank_object(r), "tree": r.tree().to_string() })
}

pub fn ranks_from_json(v: &Value) -> Result<RankTuple> {
    let obj = as_object(v, "rank tuple")?;
    let tree: DimensionTree = field(obj, "tree")?
        .as_str()
        .ok_or_else(|| bad("tree must be a string"))?
        .parse()?;
    ranks_from_object(&tree, field(obj, "ranks")?)
}

pub fn tree_tensor_to_json<T: Real>(t: &TreeTensor<T>) -> Value {
    let tree = t.tree();
    let mut leaves = Map::new();
    for j in 1..=tree.d() {
        let u = t.leaf_basis(j);
        let rows: Vec<Value> = (0..u.nrows())
            .map(|i| Value::Array(u.row(i).iter().map(|&x| num(x)).collect()))
            .collect();
        leaves.insert(j.to_string(), Value::Array(rows));
    }
    let mut cores = Map::new();
    for id in tree.inner_ids() {
        let v = tree.vertex(id);
        let c = t.transfer_core(v).expect("interior vertex holds a core");
        cores.insert(v.key(), array_json(c));
    }
    json!({
        "flags": serde_json::to_value(t.flags()).expect("flags serialize"),
        "leaf_bases": leaves,
        "ranks": rank_object(t.ranks()),
        "root_core": array_json(t.root_core()),
        "shape": t.shape(),
        "transfer_cores": cores,
        "tree": tree.to_string(),
    })
}

/// Reads a tree tensor, validating every shape invariant. Stored flags are
/// ignored and recomputed; stored ranks must match the parameter shapes.
pub fn tree_tensor_from_json<T: Real>(v: &Value) -> Result<TreeTensor<T>> {
    let obj = as_object(v, "tree tensor")?;
    let shape = as_usize_list(field(obj, "shape")?, "shape")?;
    let notation = field(obj, "tree")?.as_str().ok_or_else(|| bad("tree must be a string"))?;
    let tree = DimensionTree::build(shape.len(), notation)?;

    let leaf_obj = as_object(field(obj, "leaf_bases")?, "leaf_bases")?;
    let mut leaves = Vec::with_capacity(tree.d());
    for j in 1..=tree.d() {
        let rows = field(leaf_obj, &j.to_string())?
            .as_array()
            .ok_or_else(|| bad(format!("leaf basis {j} must be an array of rows")))?;
        let parsed: Vec<Vec<T>> = rows
            .iter()
            .map(|r| as_scalars(r, &format!("leaf basis {j} row")))
            .collect::<Result<_>>()?;
        let ncols = parsed.first().map_or(0, Vec::len);
        if parsed.iter().any(|r| r.len() != ncols) {
            return Err(Error::ShapeMismatch(format!("leaf basis {j} has ragged rows")));
        }
        let n = shape[j - 1];
        // a rank-0 basis has no columns, so its rows are empty lists
        let nrows = if parsed.is_empty() { n } else { parsed.len() };
        leaves.push(DMatrix::from_fn(nrows, ncols, |i, k| parsed[i][k]));
    }
    if leaf_obj.len() != tree.d() {
        return Err(bad("leaf_bases has keys that are not modes"));
    }

    let core_obj = as_object(field(obj, "transfer_cores")?, "transfer_cores")?;
    let mut cores = BTreeMap::new();
    for (key, val) in core_obj {
        let vertex = Vertex::parse_key(key)?;
        cores.insert(vertex, array_from_json(val, "transfer core")?);
    }
    let root = array_from_json(field(obj, "root_core")?, "root_core")?;
    let t = TreeTensor::from_parts(&tree, &shape, leaves, cores, root)?;
    let stored = ranks_from_object(&tree, field(obj, "ranks")?)?;
    if &stored != t.ranks() {
        return Err(Error::ShapeMismatch(format!(
            "stored ranks {stored} disagree with parameter shapes {}",
            t.ranks()
        )));
    }
    Ok(t)
}

/// Any of the three file kinds.
#[derive(Clone, Debug)]
pub enum Document<T: Real> {
    Dense(DenseTensor<T>),
    Ranks(RankTuple),
    Tree(Box<TreeTensor<T>>),
}

impl<T: Real> Document<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Dense(_) => "dense",
            Document::Ranks(_) => "ranks",
            Document::Tree(_) => "tree_tensor",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Document::Dense(t) => dense_to_json(t),
            Document::Ranks(r) => ranks_to_json(r),
            Document::Tree(t) => tree_tensor_to_json(t),
        }
    }
}

/// Parses a document, telling the kinds apart by their fields.
pub fn parse_document<T: Real>(text: &str) -> Result<Document<T>> {
    let v: Value = serde_json::from_str(text)?;
    let obj = as_object(&v, "document")?;
    if obj.contains_key("leaf_bases") {
        Ok(Document::Tree(Box::new(tree_tensor_from_json(&v)?)))
    } else if obj.contains_key("ranks") {
        Ok(Document::Ranks(ranks_from_json(&v)?))
    } else if obj.contains_key("values") {
        Ok(Document::Dense(dense_from_json(&v)?))
    } else {
        Err(bad("unrecognized document: expected a dense tensor, rank tuple or tree tensor"))
    }
}

pub fn parse_dense<T: Real>(text: &str) -> Result<DenseTensor<T>> {
    dense_from_json(&serde_json::from_str(text)?)
}

pub fn parse_tree_tensor<T: Real>(text: &str) -> Result<TreeTensor<T>> {
    tree_tensor_from_json(&serde_json::from_str(text)?)
}

pub fn parse_ranks(text: &str) -> Result<RankTuple> {
    ranks_from_json(&serde_json::from_str(text)?)
}
