//! Instance files, generators and per-turn CSV records.
//!
//! Instance text format:
//!
//! ```text
//! white 3
//! black: 1 2
//! black: 2 3
//! black: 3
//! ```
//!
//! Blank lines and lines starting with `#` are ignored on input.

use std::fmt;
use std::io;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::forest::{ForestError, OnlineForest};
use crate::levels::Beta;
use crate::trace::Trace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub white_count: usize,
    pub arrivals: Vec<Vec<u32>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}, field {field}: {message}")]
    Parse { line: usize, field: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: ForestError },
    #[error("family {family} cannot produce an instance with n = {n}: {reason}")]
    Infeasible {
        family: Family,
        n: usize,
        reason: &'static str,
    },
    #[error("unknown family `{0}` (expected random_tree, degree2, pendant_chain or star_burst)")]
    UnknownFamily(String),
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let err = |line: usize, field: usize, message: String| ScenarioError::Parse { line, field, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hl, header) = lines
            .next()
            .ok_or_else(|| err(1, 1, "missing `white <n>` header".into()))?;
        let mut head = header.split_whitespace();
        if head.next() != Some("white") {
            return Err(err(hl, 1, "expected `white`".into()));
        }
        let white_count = match head.next().map(str::parse::<usize>) {
            Some(Ok(n)) if n > 0 => n,
            Some(Ok(_)) => return Err(err(hl, 2, "white count must be positive".into())),
            Some(Err(e)) => return Err(err(hl, 2, format!("bad white count: {e}"))),
            None => return Err(err(hl, 2, "missing white count".into())),
        };
        if head.next().is_some() {
            return Err(err(hl, 3, "trailing field".into()));
        }

        let mut arrivals = Vec::new();
        for (ln, line) in lines {
            let rest = line
                .strip_prefix("black:")
                .ok_or_else(|| err(ln, 1, "expected `black:`".into()))?;
            let mut ids = Vec::new();
            for (i, tok) in rest.split_whitespace().enumerate() {
                let field = i + 2;
                let id: u32 = tok
                    .parse()
                    .map_err(|e| err(ln, field, format!("bad white id `{tok}`: {e}")))?;
                if id == 0 || id as usize > white_count {
                    return Err(err(ln, field, format!("white id {id} outside 1..={white_count}")));
                }
                ids.push(id);
            }
            if ids.is_empty() {
                return Err(err(ln, 2, "an arrival needs at least one neighbor".into()));
            }
            arrivals.push(ids);
        }
        Ok(InstanceFile { white_count, arrivals })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("white {}\n", self.white_count);
        for a in &self.arrivals {
            out.push_str("black:");
            for id in a {
                out.push_str(&format!(" {id}"));
            }
            out.push('\n');
        }
        out
    }

    /// Replays the arrivals; a failing arrival is reported by its line in
    /// [`InstanceFile::to_text`] order.
    pub fn to_forest(&self) -> Result<OnlineForest, ScenarioError> {
        let mut f = OnlineForest::new(self.white_count).map_err(|source| ScenarioError::Invalid { line: 1, source })?;
        for (i, a) in self.arrivals.iter().enumerate() {
            f.add_black_whites(a)
                .map_err(|source| ScenarioError::Invalid { line: i + 2, source })?;
        }
        Ok(f)
    }

    pub fn from_forest(f: &OnlineForest) -> Self {
        InstanceFile {
            white_count: f.white_count(),
            arrivals: f.arrivals().to_vec(),
        }
    }
}

impl FromStr for InstanceFile {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InstanceFile::parse(s)
    }
}

impl fmt::Display for InstanceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomTree,
    Degree2,
    PendantChain,
    StarBurst,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::RandomTree,
        Family::Degree2,
        Family::PendantChain,
        Family::StarBurst,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomTree => "random_tree",
            Family::Degree2 => "degree2",
            Family::PendantChain => "pendant_chain",
            Family::StarBurst => "star_burst",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| ScenarioError::UnknownFamily(s.to_string()))
    }
}

/// Components of whites that can still be joined, with their members.
struct Pool {
    roots: Vec<Vec<u32>>,
}

impl Pool {
    fn new(n: usize) -> Self {
        Pool {
            roots: (1..=n as u32).map(|w| vec![w]).collect(),
        }
    }

    /// Picks `k` distinct components at random, one random white from each,
    /// and merges them.
    fn join(&mut self, k: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let k = k.min(self.roots.len());
        let picks: Vec<usize> = rand::seq::index::sample(rng, self.roots.len(), k).into_vec();
        let whites: Vec<u32> = picks.iter().map(|&i| *self.roots[i].choose(rng).unwrap()).collect();
        let mut sorted = picks;
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let mut merged = Vec::new();
        for i in sorted {
            let mut part = self.roots.swap_remove(i);
            if part.len() > merged.len() {
                std::mem::swap(&mut part, &mut merged);
            }
            merged.extend(part);
        }
        self.roots.push(merged);
        whites
    }
}

/// Generates an instance; identical `(family, n, seed)` give identical files.
///
/// - `pendant_chain`: `b_i → {w_i, w_{i+1}}` for `i < n`, then `b_n → {w_n}`.
/// - `star_burst`: a degree-3 hub `b1 → {w1, w2, w3}`; the remaining whites
///   are attached in pairs by degree-3 connectors `{w_k, w_{k+1}, w_r}`
///   (a lone last white by `{w_k, w_r}`), where `w_r` is an earlier white on
///   a seeded stride starting at `w1`. From the second connector on, each is
///   followed by a pendant arrival on a random white with probability ½.
/// - `random_tree`: `n` arrivals of degree 1, 2 or 3 (weights 2:3:1) joining
///   random components.
/// - `degree2`: `n − 1` arrivals, each joining two random components.
pub fn generate(family: Family, n: usize, seed: u64) -> Result<InstanceFile, ScenarioError> {
    let infeasible = |reason| ScenarioError::Infeasible { family, n, reason };
    if n == 0 {
        return Err(infeasible("n must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n32 = n as u32;
    let arrivals = match family {
        Family::PendantChain => {
            let mut a: Vec<Vec<u32>> = (1..n32).map(|i| vec![i, i + 1]).collect();
            a.push(vec![n32]);
            a
        }
        Family::StarBurst => {
            let mut a = vec![(1..=n32.min(3)).collect::<Vec<_>>()];
            let stride = rng.gen_range(1..=n32.max(2));
            let mut k = 4;
            while k <= n32 {
                let r = 1 + (stride * (k - 4)) % (k - 1);
                if k < n32 {
                    a.push(vec![k, k + 1, r]);
                } else {
                    a.push(vec![k, r]);
                }
                if k > 4 && rng.gen_bool(0.5) {
                    a.push(vec![rng.gen_range(1..=k)]);
                }
                k += 2;
            }
            a
        }
        Family::RandomTree => {
            let mut pool = Pool::new(n);
            (0..n)
                .map(|_| {
                    let k = [1, 1, 2, 2, 2, 3][rng.gen_range(0..6)];
                    let mut w = pool.join(k, &mut rng);
                    w.sort_unstable();
                    w
                })
                .collect()
        }
        Family::Degree2 => {
            if n < 2 {
                return Err(infeasible("a degree-2 arrival needs two separate white components"));
            }
            let mut pool = Pool::new(n);
            (1..n)
                .map(|_| {
                    let mut w = pool.join(2, &mut rng);
                    w.sort_unstable();
                    w
                })
                .collect()
        }
    };
    Ok(InstanceFile {
        white_count: n,
        arrivals,
    })
}

/// One CSV row per arrival. Empty fields stand for "none"; an infinite
/// distance is written `inf`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRow {
    pub t: usize,
    pub b_id: String,
    pub pi_len: Option<usize>,
    pub dist: Distance,
    pub sec_dist: Distance,
    pub prefix_len: Option<usize>,
    pub suffix_len: Option<usize>,
    pub dispatch_id: Option<String>,
    pub deaths_count: usize,
    pub turn_class: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
}

impl RunRecord {
    pub fn from_trace(forest: &OnlineForest, trace: &Trace, beta: Beta) -> Self {
        let rows = trace
            .turns
            .iter()
            .map(|r| {
                let finite = r.dist.is_finite();
                RunRow {
                    t: r.turn,
                    b_id: forest.vertex(r.arrival).to_string(),
                    pi_len: r.sap_len,
                    dist: r.dist,
                    sec_dist: r.sec_dist,
                    prefix_len: finite.then_some(r.prefix_len),
                    suffix_len: finite.then_some(r.suffix_len),
                    dispatch_id: r.dispatch.as_ref().map(|d| forest.vertex(d.node).to_string()),
                    deaths_count: r.deaths.len(),
                    turn_class: r.class(beta).to_string(),
                }
            })
            .collect();
        RunRecord { rows }
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        wtr.write_record([
            "t",
            "b_id",
            "pi_len",
            "dist",
            "sec_dist",
            "prefix_len",
            "suffix_len",
            "dispatch_id",
            "deaths_count",
            "turn_class",
        ])?;
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: io::Read>(r: R) -> csv::Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let rows = rdr.deserialize().collect::<csv::Result<Vec<RunRow>>>()?;
        Ok(RunRecord { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::VertexId;
    use crate::trace::run_trace;

    #[test]
    fn e1_text_round_trip() {
        let text = "white 3\nblack: 1 2\nblack: 2 3\nblack: 3\n";
        let inst = InstanceFile::parse(text).unwrap();
        assert_eq!(inst.arrivals, vec![vec![1, 2], vec![2, 3], vec![3]]);
        assert_eq!(inst.to_text(), text);
        assert_eq!(generate(Family::PendantChain, 3, 99).unwrap(), inst);
    }

    #[test]
    fn parse_errors_are_positioned() {
        let e = InstanceFile::parse("white 3\nblack: 1 0\n").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 2, field: 3, .. }), "{e}");
        let e = InstanceFile::parse("# c\n\nwhite x\n").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 3, field: 2, .. }));
        let e = InstanceFile::parse("white 2\nblack 1\n").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 2, field: 1, .. }));
        assert!(InstanceFile::parse("").is_err());
        assert!(InstanceFile::parse("white 2\nblack:\n").is_err());
    }

    #[test]
    fn cycles_name_both_neighbors() {
        let inst = InstanceFile::parse("white 2\nblack: 1 2\nblack: 2 1\n").unwrap();
        match inst.to_forest().unwrap_err() {
            ScenarioError::Invalid {
                line: 3,
                source: ForestError::CycleWouldForm { first, second },
            } => assert_eq!((first, second), (VertexId::White(1), VertexId::White(2))),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn family_shapes() {
        let s = generate(Family::StarBurst, 4, 7).unwrap();
        assert_eq!(s.arrivals, vec![vec![1, 2, 3], vec![4, 1]]);
        assert!(matches!(
            generate(Family::Degree2, 1, 0),
            Err(ScenarioError::Infeasible {
                family: Family::Degree2,
                n: 1,
                ..
            })
        ));
        for fam in Family::ALL {
            for n in [1usize, 2, 5, 40] {
                let Ok(inst) = generate(fam, n, 3) else {
                    continue;
                };
                let f = inst.to_forest().unwrap();
                assert_eq!(generate(fam, n, 3).unwrap().to_text(), inst.to_text());
                if fam == Family::Degree2 {
                    let tr = run_trace(&f);
                    assert!(tr.turns.iter().all(|r| r.deaths.is_empty()));
                    assert!(inst.arrivals.iter().all(|a| a.len() == 2));
                }
            }
        }
        assert_ne!(
            generate(Family::RandomTree, 30, 1).unwrap(),
            generate(Family::RandomTree, 30, 2).unwrap()
        );
        assert_eq!("star_burst".parse::<Family>().unwrap(), Family::StarBurst);
        assert!("tree".parse::<Family>().is_err());
    }

    #[test]
    fn csv_rows() {
        let f = OnlineForest::from_arrivals(2, &[vec![1, 2], vec![1], vec![1]]).unwrap();
        let rec = RunRecord::from_trace(&f, &run_trace(&f), Beta::two());
        let text = rec.to_csv_string();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("t,b_id,pi_len,dist,sec_dist,prefix_len,suffix_len,dispatch_id,deaths_count,turn_class")
        );
        assert_eq!(lines.next(), Some("1,b1,1,1,1,0,1,b1,0,CASE_JUMP"));
        assert_eq!(lines.nth(1), Some("3,b3,,inf,inf,,,,1,DIST_INFINITE"));
        assert_eq!(RunRecord::read_csv(text.as_bytes()).unwrap(), rec);
        assert_eq!(RunRecord::default().to_csv_string().lines().count(), 1);
    }
}
