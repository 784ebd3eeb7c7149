//! Versioned JSON schemas for forests, coding sequences, offspring laws
//! and signatures. Writers emit a canonical compact form (stable field
//! order, sorted map keys) so equal values round-trip byte-exactly;
//! readers reject unknown schema versions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::branching::OffspringLaw;
use crate::coding::CodingSequence;
use crate::error::{Error, Result};
use crate::exact;
use crate::forest::{Signature, TreeNode, TypedForest};

pub const FOREST_SCHEMA: &str = "dforest/forest/1";
pub const CODING_SCHEMA: &str = "dforest/coding/1";
pub const LAW_SCHEMA: &str = "dforest/law/1";
pub const SIGNATURE_SCHEMA: &str = "dforest/signature/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeNodeDoc {
    pub color: usize,
    #[serde(default)]
    pub children: Vec<TreeNodeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestDoc {
    pub schema: String,
    pub d: usize,
    pub trees: Vec<TreeNodeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodingDoc {
    pub schema: String,
    pub d: usize,
    pub lengths: Vec<usize>,
    /// `increments[i]` lists `lengths[i]` integer vectors of size `d`.
    pub increments: Vec<Vec<Vec<i64>>>,
    /// Root type sequence carried alongside so decoding needs no side
    /// channel; colors `1..=d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawDoc {
    pub schema: String,
    pub d: usize,
    /// One map per type: comma-separated offspring vector -> exact
    /// weight (`p/q` or integer literal).
    pub nu: Vec<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusEntryDoc {
    /// Color in `1..=d`.
    pub color: usize,
    pub offspring: Vec<i64>,
    pub count: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignatureDoc {
    pub schema: String,
    pub d: usize,
    pub r: Vec<i64>,
    pub n: Vec<i64>,
    /// Full matrix including the diagonal.
    pub k: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indegree_tuple: Option<Vec<Vec<Vec<i64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census: Option<Vec<CensusEntryDoc>>,
    /// One-type degree sequence (child count per labeled vertex), used
    /// by the degree-sequence counting formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<i64>>,
}

fn check_schema(found: &str, expected: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::Parse(format!("unsupported schema {found:?}, expected {expected:?}")))
    }
}

fn node_to_doc(node: &TreeNode) -> TreeNodeDoc {
    TreeNodeDoc { color: node.color, children: node.children.iter().map(node_to_doc).collect() }
}

fn doc_to_node(doc: &TreeNodeDoc) -> TreeNode {
    TreeNode { color: doc.color, children: doc.children.iter().map(doc_to_node).collect() }
}

pub fn forest_to_json(f: &TypedForest) -> String {
    let doc = ForestDoc {
        schema: FOREST_SCHEMA.into(),
        d: f.d(),
        trees: f.to_trees().iter().map(node_to_doc).collect(),
    };
    serde_json::to_string(&doc).expect("forest serialization cannot fail")
}

pub fn forest_from_json(text: &str) -> Result<TypedForest> {
    let doc: ForestDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("forest json: {e}")))?;
    check_schema(&doc.schema, FOREST_SCHEMA)?;
    let trees: Vec<TreeNode> = doc.trees.iter().map(doc_to_node).collect();
    TypedForest::new(doc.d, &trees)
}

pub fn coding_to_json(x: &CodingSequence, roots: Option<&[usize]>) -> String {
    let doc = CodingDoc {
        schema: CODING_SCHEMA.into(),
        d: x.d(),
        lengths: x.lengths(),
        increments: (0..x.d()).map(|i| x.steps_of(i).to_vec()).collect(),
        roots: roots.map(|r| r.to_vec()),
    };
    serde_json::to_string(&doc).expect("coding serialization cannot fail")
}

pub fn coding_from_json(text: &str) -> Result<(CodingSequence, Option<Vec<usize>>)> {
    let doc: CodingDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("coding json: {e}")))?;
    check_schema(&doc.schema, CODING_SCHEMA)?;
    let lengths: Vec<usize> = doc.increments.iter().map(|p| p.len()).collect();
    if lengths != doc.lengths {
        return Err(Error::Parse("declared lengths disagree with the increments".into()));
    }
    let x = CodingSequence::from_steps(doc.d, doc.increments)?;
    Ok((x, doc.roots))
}

fn offspring_key(z: &[usize]) -> String {
    z.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_offspring_key(key: &str, d: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != d {
        return Err(Error::Parse(format!("offspring key {key:?} must have {d} entries")));
    }
    parts
        .iter()
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad key {key:?}"))))
        .collect()
}

pub fn law_to_json(law: &OffspringLaw) -> String {
    let nu: Vec<BTreeMap<String, String>> = (0..law.d())
        .map(|i| {
            law.support(i)
                .iter()
                .map(|(z, w)| (offspring_key(z), exact::format_rational(w)))
                .collect()
        })
        .collect();
    let doc = LawDoc { schema: LAW_SCHEMA.into(), d: law.d(), nu };
    serde_json::to_string(&doc).expect("law serialization cannot fail")
}

pub fn law_from_json(text: &str) -> Result<OffspringLaw> {
    let doc: LawDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("law json: {e}")))?;
    check_schema(&doc.schema, LAW_SCHEMA)?;
    let nu = doc
        .nu
        .iter()
        .map(|support| {
            support
                .iter()
                .map(|(key, weight)| {
                    Ok((parse_offspring_key(key, doc.d)?, exact::parse_rational(weight)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    OffspringLaw::new(doc.d, nu)
}

pub fn signature_to_json(sig: &Signature) -> String {
    let doc = SignatureDoc {
        schema: SIGNATURE_SCHEMA.into(),
        d: sig.d,
        r: sig.r.clone(),
        n: sig.n.clone(),
        k: sig.k.clone(),
        indegree_tuple: None,
        census: None,
        degrees: None,
    };
    serde_json::to_string(&doc).expect("signature serialization cannot fail")
}

pub fn signature_doc_from_json(text: &str) -> Result<SignatureDoc> {
    let doc: SignatureDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("signature json: {e}")))?;
    check_schema(&doc.schema, SIGNATURE_SCHEMA)?;
    Ok(doc)
}

pub fn signature_from_doc(doc: &SignatureDoc) -> Result<Signature> {
    Signature::new(doc.d, doc.r.clone(), doc.n.clone(), doc.k.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(color: usize, children: Vec<TreeNode>) -> TreeNode {
        TreeNode::new(color, children)
    }

    #[test]
    fn forest_round_trip_is_byte_exact() {
        let f = TypedForest::new(
            2,
            &[t(1, vec![t(1, vec![t(2, vec![])]), t(2, vec![])]), t(2, vec![])],
        )
        .unwrap();
        let json = forest_to_json(&f);
        let g = forest_from_json(&json).unwrap();
        assert_eq!(f, g);
        assert_eq!(forest_to_json(&g), json);
    }

    #[test]
    fn forest_rejects_unknown_schema() {
        let json = r#"{"schema":"dforest/forest/9","d":1,"trees":[]}"#;
        assert!(forest_from_json(json).is_err());
    }

    #[test]
    fn coding_round_trip() {
        let f = TypedForest::new(2, &[t(1, vec![t(2, vec![])])]).unwrap();
        let x = crate::coding::encode(&f);
        let json = coding_to_json(&x, Some(&[1]));
        let (y, roots) = coding_from_json(&json).unwrap();
        assert_eq!(x, y);
        assert_eq!(roots, Some(vec![1]));
        assert_eq!(coding_to_json(&y, roots.as_deref()), json);
    }

    #[test]
    fn coding_rejects_length_mismatch() {
        let json = r#"{"schema":"dforest/coding/1","d":1,"lengths":[2],"increments":[[[-1]]]}"#;
        assert!(coding_from_json(json).is_err());
    }

    #[test]
    fn law_round_trip() {
        let law = OffspringLaw::from_parts(
            2,
            &[&[(&[0, 0], "1/2"), (&[0, 2], "1/2")], &[(&[0, 0], "1/2"), (&[2, 0], "1/2")]],
        )
        .unwrap();
        let json = law_to_json(&law);
        let back = law_from_json(&json).unwrap();
        assert_eq!(law, back);
        assert_eq!(law_to_json(&back), json);
    }

    #[test]
    fn law_rejects_bad_weights() {
        let json = r#"{"schema":"dforest/law/1","d":1,"nu":[{"0":"1/3"}]}"#;
        assert!(law_from_json(json).is_err());
        let json = r#"{"schema":"dforest/law/1","d":1,"nu":[{"0,0":"1"}]}"#;
        assert!(law_from_json(json).is_err());
    }

    #[test]
    fn signature_round_trip() {
        let sig =
            Signature::from_off_diagonal(2, vec![1, 0], vec![2, 1], vec![vec![0, 1], vec![0, 0]])
                .unwrap();
        let json = signature_to_json(&sig);
        let doc = signature_doc_from_json(&json).unwrap();
        let back = signature_from_doc(&doc).unwrap();
        assert_eq!(sig, back);
    }
}
