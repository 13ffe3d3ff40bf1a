//! Response bodies as `serde_json::Value` (object keys come out sorted).

use causeloom_core::event_store::occurrence_histogram;
use causeloom_core::hypergraph::{aggregate, filter_edges, AggregatedGroup, DirectedHypergraph, SignFilter};
use causeloom_core::layout::{
    k_shortest_paths, layered_layout, order_columns, order_rows, propagation_path, ColumnOrder, ColumnStrategy,
    RowOrder, RowStrategy, SignedDigraph,
};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::View;

#[derive(Debug)]
pub enum RenderError {
    BadRequest(String),
    NotFound(String),
}

type Result<T> = std::result::Result<T, RenderError>;

fn bad(msg: impl Into<String>) -> RenderError {
    RenderError::BadRequest(msg.into())
}

/// Filters and orderings shared by `/api/graph` and `/api/orderings`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphQuery {
    pub min_strength: Option<f64>,
    pub max_degree: Option<usize>,
    pub sign: Option<String>,
    /// base | groups | alphabetical | manual
    pub rows: Option<String>,
    /// direction | strength | degree | topology | manual
    pub columns: Option<String>,
    /// Entity name, required by the topology column order.
    pub focus: Option<String>,
    /// Comma-separated entity ids for `rows=manual`.
    pub row_perm: Option<String>,
    /// Comma-separated group indices for `columns=manual`.
    pub column_perm: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationQuery {
    pub source: Option<String>,
    pub target: Option<String>,
    pub min_strength: Option<f64>,
    pub max_degree: Option<usize>,
    pub sign: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramQuery {
    pub entity: Option<String>,
    pub bin: Option<f64>,
}

fn entity_id(view: &View, name: &str) -> Result<usize> {
    view.snapshot
        .entities()
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| RenderError::NotFound(format!("unknown entity {name:?}")))
}

fn parse_perm(raw: Option<&str>, field: &str) -> Result<Vec<usize>> {
    let raw = raw.ok_or_else(|| bad(format!("{field} is required for a manual order")))?;
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad(format!("{field}: {s:?} is not an index"))))
        .collect()
}

fn filtered(view: &View, min_strength: Option<f64>, max_degree: Option<usize>, sign: Option<&str>) -> Result<DirectedHypergraph> {
    let min = min_strength.unwrap_or(0.0);
    if !(min >= 0.0) {
        return Err(bad("min_strength must be a non-negative number"));
    }
    let sign: SignFilter = match sign {
        Some(s) => s.parse().map_err(|_| bad(format!("sign must be any, impelling or inhibiting, not {s:?}")))?,
        None => SignFilter::Any,
    };
    Ok(filter_edges(&view.amended, min, max_degree.unwrap_or(usize::MAX), sign))
}

fn orders(view: &View, q: &GraphQuery, groups: &[AggregatedGroup]) -> Result<(RowOrder, ColumnOrder)> {
    let names = view.snapshot.entities();
    let row_perm;
    let rows = match q.rows.as_deref().unwrap_or("base") {
        "base" => RowStrategy::Base,
        "alphabetical" => RowStrategy::Alphabetical,
        "groups" => RowStrategy::Groups {
            partition: &view.snapshot.partition,
            embeddings: None,
        },
        "manual" => {
            row_perm = parse_perm(q.row_perm.as_deref(), "row_perm")?;
            RowStrategy::Manual(&row_perm)
        }
        other => return Err(bad(format!("unknown row order {other:?}"))),
    };
    let column_perm;
    let columns = match q.columns.as_deref().unwrap_or("direction") {
        "direction" => ColumnStrategy::Direction,
        "strength" => ColumnStrategy::Strength,
        "degree" => ColumnStrategy::Degree,
        "topology" => {
            let focus = q.focus.as_deref().ok_or_else(|| bad("focus is required for the topology order"))?;
            ColumnStrategy::Topology {
                focus: entity_id(view, focus)?,
            }
        }
        "manual" => {
            column_perm = parse_perm(q.column_perm.as_deref(), "column_perm")?;
            ColumnStrategy::Manual(&column_perm)
        }
        other => return Err(bad(format!("unknown column order {other:?}"))),
    };
    let row_order = order_rows(names, rows).map_err(|e| bad(e.to_string()))?;
    let column_order = order_columns(groups, names.len(), columns).map_err(|e| bad(e.to_string()))?;
    Ok((row_order, column_order))
}

pub fn graph(view: &View, q: &GraphQuery) -> Result<Value> {
    let hg = filtered(view, q.min_strength, q.max_degree, q.sign.as_deref())?;
    let groups = aggregate(&hg);
    let (rows, columns) = orders(view, q, &groups)?;
    let names = view.snapshot.entities();
    let community = &view.snapshot.partition.community;
    let entities: Vec<Value> = rows
        .permutation
        .iter()
        .map(|&v| json!({"id": v, "name": names[v], "community": community[v]}))
        .collect();
    let ordered: Vec<Value> = columns
        .permutation
        .iter()
        .map(|&i| {
            let mut g = serde_json::to_value(&groups[i]).expect("group serializes");
            g["index"] = json!(i);
            g
        })
        .collect();
    Ok(json!({
        "snapshot": view.snapshot_digest,
        "journal_len": view.journal_len,
        "entities": entities,
        "rows": rows,
        "columns": columns,
        "groups": ordered,
    }))
}

pub fn orderings(view: &View, q: &GraphQuery) -> Result<Value> {
    let hg = filtered(view, q.min_strength, q.max_degree, q.sign.as_deref())?;
    let groups = aggregate(&hg);
    let (rows, columns) = orders(view, q, &groups)?;
    Ok(json!({"rows": rows, "columns": columns, "group_count": groups.len()}))
}

pub fn propagation(view: &View, q: &PropagationQuery, k: usize) -> Result<Value> {
    let source = q.source.as_deref().ok_or_else(|| bad("source is required"))?;
    let target = q.target.as_deref().ok_or_else(|| bad("target is required"))?;
    let (s, t) = (entity_id(view, source)?, entity_id(view, target)?);
    let hg = filtered(view, q.min_strength, q.max_degree, q.sign.as_deref())?;
    let g = SignedDigraph::from_hypergraph(&hg);
    let best = propagation_path(&g, s, t).map_err(|e| bad(e.to_string()))?;
    let paths = k_shortest_paths(&g, s, t, k).map_err(|e| bad(e.to_string()))?;
    let label = |ids: &[usize]| ids.iter().map(|&v| g.labels[v].clone()).collect::<Vec<_>>();
    let layers: Vec<Vec<String>> = layered_layout(&paths, s).iter().map(|l| label(l)).collect();
    let alternatives: Vec<Value> = paths
        .iter()
        .map(|p| json!({"nodes": label(&p.nodes), "strengths": p.strengths, "distance": p.distance}))
        .collect();
    let mut body = json!({
        "source": source,
        "target": target,
        "reachable": best.path().is_some(),
        "layers": layers,
        "alternatives": alternatives,
    });
    if let Some(p) = best.path() {
        body["nodes"] = json!(label(&p.nodes));
        body["strengths"] = json!(p.strengths);
        body["distance"] = json!(p.distance);
    }
    Ok(body)
}

pub fn histogram(view: &View, q: &HistogramQuery) -> Result<Value> {
    let name = q.entity.as_deref().ok_or_else(|| bad("entity is required"))?;
    let entity = entity_id(view, name)?;
    let bin = q.bin.unwrap_or(1.0);
    let counts = occurrence_histogram(&view.snapshot.corpus, entity, bin).map_err(|e| bad(e.to_string()))?;
    Ok(json!({
        "entity": name,
        "bin": bin,
        "total": counts.iter().sum::<u64>(),
        "counts": counts,
    }))
}

pub fn communities(view: &View) -> Value {
    let p = &view.snapshot.partition;
    let names = view.snapshot.entities();
    let groups: Vec<Value> = (0..p.num_communities())
        .map(|c| {
            let members: Vec<&String> = p.members(c).into_iter().map(|v| &names[v]).collect();
            json!({"id": c, "size": members.len(), "members": members})
        })
        .collect();
    json!({
        "community": p.community,
        "modularity": p.modularity,
        "history": p.history,
        "communities": groups,
    })
}
