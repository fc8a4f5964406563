//! Pharmacophore geometry: labeled distance graphs, the contact potential,
//! and the vertex-weighted binding interaction graph whose heavy cliques are
//! candidate binding poses.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;

/// Default flexibility constant, in Ångström.
pub const DEFAULT_TAU: f64 = 1.0;
/// Default interaction cutoff distance, in Ångström.
pub const DEFAULT_EPSILON: f64 = 0.5;

const BUILTIN_POTENTIAL: &str = include_str!("../data/pharmacophore_potential.csv");

/// The six pharmacophore point types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PharmacophoreLabel {
    NegativeCharge,
    PositiveCharge,
    HBondDonor,
    HBondAcceptor,
    Hydrophobe,
    Aromatic,
}

impl PharmacophoreLabel {
    pub const ALL: [PharmacophoreLabel; 6] = [
        PharmacophoreLabel::NegativeCharge,
        PharmacophoreLabel::PositiveCharge,
        PharmacophoreLabel::HBondDonor,
        PharmacophoreLabel::HBondAcceptor,
        PharmacophoreLabel::Hydrophobe,
        PharmacophoreLabel::Aromatic,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PharmacophoreLabel::NegativeCharge => "NegativeCharge",
            PharmacophoreLabel::PositiveCharge => "PositiveCharge",
            PharmacophoreLabel::HBondDonor => "HBondDonor",
            PharmacophoreLabel::HBondAcceptor => "HBondAcceptor",
            PharmacophoreLabel::Hydrophobe => "Hydrophobe",
            PharmacophoreLabel::Aromatic => "Aromatic",
        }
    }
}

impl fmt::Display for PharmacophoreLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PharmacophoreLabel {
    type Err = Error;

    /// Case, spaces, dashes and underscores are ignored. Anything outside the
    /// six known types is an error.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        use PharmacophoreLabel::*;
        Ok(match key.as_str() {
            "negativecharge" | "negative" => NegativeCharge,
            "positivecharge" | "positive" => PositiveCharge,
            "hbonddonor" | "hydrogenbonddonor" | "donor" => HBondDonor,
            "hbondacceptor" | "hydrogenbondacceptor" | "acceptor" => HBondAcceptor,
            "hydrophobe" | "hydrophobic" => Hydrophobe,
            "aromatic" | "aromaticring" => Aromatic,
            _ => return Err(Error::invalid(format!("unknown pharmacophore label {s:?}"))),
        })
    }
}

impl Serialize for PharmacophoreLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for PharmacophoreLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PharmacophorePoint {
    pub label: PharmacophoreLabel,
    #[serde(rename = "xyz")]
    pub position: [f64; 3],
}

impl PharmacophorePoint {
    pub fn new(label: PharmacophoreLabel, position: [f64; 3]) -> Self {
        PharmacophorePoint { label, position }
    }

    pub fn distance(&self, other: &PharmacophorePoint) -> f64 {
        let d: f64 = self
            .position
            .iter()
            .zip(other.position.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d.sqrt()
    }
}

/// `{ "molecule": str, "points": [ { "label": str, "xyz": [x,y,z] } ] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PharmacophoreFile {
    pub molecule: String,
    pub points: Vec<PharmacophorePoint>,
}

impl PharmacophoreFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Complete graph over pharmacophore points with Euclidean edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDistanceGraph {
    points: Vec<PharmacophorePoint>,
    edge_lengths: DMatrix<f64>,
}

impl LabeledDistanceGraph {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PharmacophorePoint] {
        &self.points
    }

    pub fn label(&self, v: usize) -> PharmacophoreLabel {
        self.points[v].label
    }

    pub fn edge_lengths(&self) -> &DMatrix<f64> {
        &self.edge_lengths
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.edge_lengths[(i, j)]
    }

    /// Number of edges of the complete graph.
    pub fn edge_count(&self) -> usize {
        self.len() * self.len().saturating_sub(1) / 2
    }
}

pub fn build_labeled_distance_graph(points: Vec<PharmacophorePoint>) -> Result<LabeledDistanceGraph> {
    if points.is_empty() {
        return Err(Error::EmptyInput("pharmacophore point list"));
    }
    if let Some(p) = points
        .iter()
        .find(|p| p.position.iter().any(|x| !x.is_finite()))
    {
        return Err(Error::invalid(format!(
            "non-finite coordinates {:?}",
            p.position
        )));
    }
    let n = points.len();
    let edge_lengths = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            points[i].distance(&points[j])
        }
    });
    Ok(LabeledDistanceGraph {
        points,
        edge_lengths,
    })
}

/// Symmetric interaction strength for every pair of labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialTable {
    kappa: [[f64; 6]; 6],
}

impl PotentialTable {
    pub fn new(kappa: [[f64; 6]; 6]) -> Result<Self> {
        for i in 0..6 {
            for j in 0..6 {
                if !kappa[i][j].is_finite() {
                    return Err(Error::invalid(format!("non-finite potential entry ({i},{j})")));
                }
                if kappa[i][j] != kappa[j][i] {
                    return Err(Error::invalid(format!(
                        "potential not symmetric at ({i},{j}): {} vs {}",
                        kappa[i][j], kappa[j][i]
                    )));
                }
            }
        }
        Ok(PotentialTable { kappa })
    }

    /// The knowledge-based pharmacophore potential shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_csv_str(BUILTIN_POTENTIAL).expect("bundled potential table is valid")
    }

    pub fn get(&self, a: PharmacophoreLabel, b: PharmacophoreLabel) -> f64 {
        self.kappa[a.index()][b.index()]
    }

    pub fn matrix(&self) -> &[[f64; 6]; 6] {
        &self.kappa
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Self::from_csv_str(&text)
    }

    /// Parses a header of six labels (optionally preceded by a corner cell)
    /// followed by one row per label: the row label, then either the
    /// lower-triangular prefix or the full row of values in header order.
    /// Entries given twice must agree; the result is symmetrized.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = reader.records();
        let header = rows
            .next()
            .ok_or(Error::EmptyInput("potential CSV"))??;
        let cells: Vec<&str> = header.iter().collect();
        let label_cells = match cells.len() {
            6 => &cells[..],
            7 => &cells[1..],
            k => {
                return Err(Error::invalid(format!(
                    "potential header has {k} cells, expected 6 labels"
                )))
            }
        };
        let columns = label_cells
            .iter()
            .map(|s| s.parse::<PharmacophoreLabel>())
            .collect::<Result<Vec<_>>>()?;
        check_distinct(&columns)?;

        let mut given: [[Option<f64>; 6]; 6] = [[None; 6]; 6];
        let mut set = |a: usize, b: usize, v: f64| -> Result<()> {
            for (x, y) in [(a, b), (b, a)] {
                match given[x][y] {
                    Some(old) if (old - v).abs() > 1e-12 => {
                        return Err(Error::invalid(format!(
                            "conflicting potential values {old} and {v} for {} / {}",
                            PharmacophoreLabel::ALL[x],
                            PharmacophoreLabel::ALL[y]
                        )))
                    }
                    _ => given[x][y] = Some(v),
                }
            }
            Ok(())
        };
        let mut seen_rows = Vec::new();
        for rec in rows {
            let rec = rec?;
            if rec.iter().all(|c| c.is_empty()) {
                continue;
            }
            let row_label: PharmacophoreLabel = rec[0].parse()?;
            seen_rows.push(row_label);
            let values: Vec<&str> = rec.iter().skip(1).filter(|c| !c.is_empty()).collect();
            if values.is_empty() || values.len() > 6 {
                return Err(Error::invalid(format!(
                    "row {row_label} has {} values",
                    values.len()
                )));
            }
            for (col, cell) in values.iter().enumerate() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad number {cell:?} in row {row_label}")))?;
                set(row_label.index(), columns[col].index(), v)?;
            }
        }
        check_distinct(&seen_rows)?;
        let mut kappa = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                kappa[i][j] = given[i][j].ok_or_else(|| {
                    Error::invalid(format!(
                        "potential entry missing for {} / {}",
                        PharmacophoreLabel::ALL[i],
                        PharmacophoreLabel::ALL[j]
                    ))
                })?;
            }
        }
        PotentialTable::new(kappa)
    }

    /// Lower-triangular CSV in the same layout the parser accepts.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("label");
        for l in PharmacophoreLabel::ALL {
            out.push(',');
            out.push_str(l.name());
        }
        out.push('\n');
        for (i, l) in PharmacophoreLabel::ALL.iter().enumerate() {
            out.push_str(l.name());
            for j in 0..=i {
                out.push_str(&format!(",{}", self.kappa[i][j]));
            }
            out.push('\n');
        }
        out
    }
}

fn check_distinct(labels: &[PharmacophoreLabel]) -> Result<()> {
    for (i, a) in labels.iter().enumerate() {
        if labels[i + 1..].contains(a) {
            return Err(Error::invalid(format!("label {a} repeated in potential CSV")));
        }
    }
    Ok(())
}

/// `P_refl(i,j) = max(P) - min(P) - P(i,j)`, turning a potential where small
/// values are favourable into one where large values are.
pub fn reflect_potential(p: &[[f64; 6]; 6]) -> Result<PotentialTable> {
    let original = PotentialTable::new(*p)?;
    let flat = original.kappa.iter().flatten();
    let max = flat.clone().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = flat.copied().fold(f64::INFINITY, f64::min);
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] = max - min - p[i][j];
        }
    }
    PotentialTable::new(out)
}

/// A pairing of one ligand point with one receptor point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Contact {
    pub ligand_vertex: usize,
    pub receptor_vertex: usize,
}

/// Whether the ligand-side and receptor-side distances of two contacts differ
/// by at most `tau + 2 epsilon`.
pub fn is_tau_flexible(
    c1: Contact,
    c2: Contact,
    ligand: &LabeledDistanceGraph,
    receptor: &LabeledDistanceGraph,
    tau: f64,
    epsilon: f64,
) -> bool {
    let dl = ligand.distance(c1.ligand_vertex, c2.ligand_vertex);
    let db = receptor.distance(c1.receptor_vertex, c2.receptor_vertex);
    (dl - db).abs() <= tau + 2.0 * epsilon
}

/// Vertex-weighted graph over all ligand x receptor contacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingInteractionGraph {
    pub graph: WeightedGraph,
    pub contacts: Vec<Contact>,
    pub tau: f64,
    pub epsilon: f64,
}

impl BindingInteractionGraph {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&BindingGraphJson::from(self))?;
        std::fs::write(path.as_ref(), text + "\n").map_err(|e| Error::io(&path, e))
    }
}

/// Graph JSON plus provenance; still readable as a plain graph file.
#[derive(Serialize)]
struct BindingGraphJson<'a> {
    n: usize,
    edges: Vec<[usize; 2]>,
    weights: &'a [f64],
    contacts: &'a [Contact],
    tau: f64,
    epsilon: f64,
}

impl<'a> From<&'a BindingInteractionGraph> for BindingGraphJson<'a> {
    fn from(b: &'a BindingInteractionGraph) -> Self {
        BindingGraphJson {
            n: b.graph.n(),
            edges: b.graph.edges().into_iter().map(|(i, j)| [i, j]).collect(),
            weights: b.graph.weights(),
            contacts: &b.contacts,
            tau: b.tau,
            epsilon: b.epsilon,
        }
    }
}

/// Vertex `l * m + b` is the contact of ligand point `l` with receptor point
/// `b`. Two contacts are adjacent iff they are a tau-flexible pair and share
/// neither their ligand point nor their receptor point.
pub fn build_binding_interaction_graph(
    ligand: &LabeledDistanceGraph,
    receptor: &LabeledDistanceGraph,
    kappa: &PotentialTable,
    tau: f64,
    epsilon: f64,
) -> Result<BindingInteractionGraph> {
    if ligand.is_empty() || receptor.is_empty() {
        return Err(Error::EmptyInput("ligand or receptor graph"));
    }
    if !(tau >= 0.0 && tau.is_finite()) || !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "tau ({tau}) and epsilon ({epsilon}) must be finite and non-negative"
        )));
    }
    let m = receptor.len();
    let contacts: Vec<Contact> = (0..ligand.len())
        .flat_map(|l| {
            (0..m).map(move |b| Contact {
                ligand_vertex: l,
                receptor_vertex: b,
            })
        })
        .collect();
    let weights = contacts
        .iter()
        .map(|c| kappa.get(ligand.label(c.ligand_vertex), receptor.label(c.receptor_vertex)))
        .collect();
    let graph = WeightedGraph::from_fn(weights, |i, j| {
        let (a, b) = (contacts[i], contacts[j]);
        a.ligand_vertex != b.ligand_vertex
            && a.receptor_vertex != b.receptor_vertex
            && is_tau_flexible(a, b, ligand, receptor, tau, epsilon)
    })?;
    Ok(BindingInteractionGraph {
        graph,
        contacts,
        tau,
        epsilon,
    })
}
