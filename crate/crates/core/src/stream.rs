//! Replayable edge streams with pass counting and cooperative space auditing.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Counts completed `open_pass` calls.
#[derive(Debug, Default)]
pub struct PassCounter(AtomicU64);

impl PassCounter {
    pub fn new() -> Arc<PassCounter> {
        Arc::new(PassCounter::default())
    }
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
    pub fn tick(&self) {
        self.0.fetch_add(1, Ordering::SeqCst);
    }
}

/// Tracks live and peak word counts reported by the modules that allocate
/// per-vertex state. Nothing here inspects the allocator.
#[derive(Debug, Default)]
pub struct SpaceAuditor {
    live: AtomicU64,
    peak: AtomicU64,
}

impl SpaceAuditor {
    pub fn new() -> Arc<SpaceAuditor> {
        Arc::new(SpaceAuditor::default())
    }

    /// Registers `words` live words until the guard is dropped.
    pub fn track(self: &Arc<Self>, words: usize) -> SpaceGuard {
        let words = words as u64;
        let now = self.live.fetch_add(words, Ordering::SeqCst) + words;
        self.peak.fetch_max(now, Ordering::SeqCst);
        SpaceGuard {
            auditor: Arc::clone(self),
            words,
        }
    }

    pub fn live_words(&self) -> u64 {
        self.live.load(Ordering::SeqCst)
    }
    pub fn peak_words(&self) -> u64 {
        self.peak.load(Ordering::SeqCst)
    }
}

#[derive(Debug)]
pub struct SpaceGuard {
    auditor: Arc<SpaceAuditor>,
    words: u64,
}

impl SpaceGuard {
    pub fn words(&self) -> u64 {
        self.words
    }
}

impl Drop for SpaceGuard {
    fn drop(&mut self) {
        self.auditor.live.fetch_sub(self.words, Ordering::SeqCst);
    }
}

/// One edge of a bipartite graph. Vertex ids are 0-based inside the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct EdgeRecord {
    /// `u * n_right + v`
    pub id: u64,
    pub u: u32,
    pub v: u32,
    pub w: u64,
}

#[derive(Clone, Debug)]
enum Source {
    Memory {
        edges: Arc<Vec<EdgeRecord>>,
        shuffle_seed: Option<u64>,
    },
    File(PathBuf),
}

/// A multi-pass source of the edges of a bipartite graph.
#[derive(Clone, Debug)]
pub struct GraphStream {
    n_left: u32,
    n_right: u32,
    m: u64,
    source: Source,
    counter: Arc<PassCounter>,
    auditor: Arc<SpaceAuditor>,
}

fn edge_id(u: u32, v: u32, n_right: u32) -> u64 {
    u as u64 * n_right as u64 + v as u64
}

impl GraphStream {
    /// In-memory stream from 0-based `(u, v, w)` triples.
    pub fn from_edges(n_left: u32, n_right: u32, edges: &[(u32, u32, u64)]) -> Result<GraphStream> {
        let mut recs = Vec::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u >= n_left || v >= n_right {
                return Err(Error::Parameter(format!(
                    "edge ({u}, {v}) outside {n_left}x{n_right}"
                )));
            }
            recs.push(EdgeRecord {
                id: edge_id(u, v, n_right),
                u,
                v,
                w,
            });
        }
        let mut ids: Vec<u64> = recs.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::Parameter("parallel edges are not supported".into()));
        }
        Ok(GraphStream {
            n_left,
            n_right,
            m: recs.len() as u64,
            source: Source::Memory {
                edges: Arc::new(recs),
                shuffle_seed: None,
            },
            counter: PassCounter::new(),
            auditor: SpaceAuditor::new(),
        })
    }

    /// File-backed stream. Only the header is read here; the body is re-read
    /// on every pass and validated as it goes.
    pub fn from_file(path: impl AsRef<Path>) -> Result<GraphStream> {
        let path = path.as_ref().to_path_buf();
        let mut reader = BufReader::new(File::open(&path)?);
        let (n_left, n_right, m, _) = read_header(&mut reader)?;
        Ok(GraphStream {
            n_left,
            n_right,
            m,
            source: Source::File(path),
            counter: PassCounter::new(),
            auditor: SpaceAuditor::new(),
        })
    }

    /// Makes every pass of an in-memory stream visit edges in a different
    /// (seeded) order.
    pub fn with_shuffled_passes(mut self, seed: u64) -> GraphStream {
        if let Source::Memory { shuffle_seed, .. } = &mut self.source {
            *shuffle_seed = Some(seed);
        }
        self
    }

    /// Same edges, fresh pass counter and auditor.
    pub fn detached(&self) -> GraphStream {
        GraphStream {
            counter: PassCounter::new(),
            auditor: SpaceAuditor::new(),
            ..self.clone()
        }
    }

    pub fn n_left(&self) -> u32 {
        self.n_left
    }
    pub fn n_right(&self) -> u32 {
        self.n_right
    }
    /// Total vertex count.
    pub fn n(&self) -> usize {
        self.n_left as usize + self.n_right as usize
    }
    pub fn m(&self) -> u64 {
        self.m
    }
    pub fn counter(&self) -> &Arc<PassCounter> {
        &self.counter
    }
    pub fn passes(&self) -> u64 {
        self.counter.get()
    }
    pub fn auditor(&self) -> &Arc<SpaceAuditor> {
        &self.auditor
    }

    /// Column index of vertex `v` of the right side in the `x` vector.
    pub fn right_index(&self, v: u32) -> usize {
        self.n_left as usize + v as usize
    }

    /// Starts a pass. The counter is incremented immediately.
    pub fn open_pass(&self) -> Result<Pass<'_>> {
        let pass_no = self.counter.get();
        self.counter.tick();
        let inner = match &self.source {
            Source::Memory {
                edges,
                shuffle_seed: None,
            } => PassInner::Memory {
                edges,
                order: None,
                pos: 0,
            },
            Source::Memory {
                edges,
                shuffle_seed: Some(seed),
            } => {
                let mut order: Vec<u32> = (0..edges.len() as u32).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(pass_no));
                order.shuffle(&mut rng);
                PassInner::Memory {
                    edges,
                    order: Some(order),
                    pos: 0,
                }
            }
            Source::File(path) => {
                let mut reader = BufReader::new(File::open(path)?);
                let (_, _, _, line) = read_header(&mut reader)?;
                PassInner::File {
                    reader,
                    line,
                    buf: String::new(),
                }
            }
        };
        Ok(Pass {
            stream: self,
            inner,
            seen: 0,
            done: false,
        })
    }

    /// Runs one pass, calling `f` on every edge.
    pub fn for_each_edge(&self, mut f: impl FnMut(&EdgeRecord) -> Result<()>) -> Result<()> {
        for e in self.open_pass()? {
            f(&e?)?;
        }
        Ok(())
    }

    /// Loads every edge into memory. Test and tooling helper; this is one
    /// counted pass and O(m) words.
    pub fn collect_edges(&self) -> Result<Vec<EdgeRecord>> {
        let mut out = Vec::with_capacity(self.m as usize);
        self.for_each_edge(|e| {
            out.push(*e);
            Ok(())
        })?;
        Ok(out)
    }
}

enum PassInner<'a> {
    Memory {
        edges: &'a [EdgeRecord],
        order: Option<Vec<u32>>,
        pos: usize,
    },
    File {
        reader: BufReader<File>,
        line: usize,
        buf: String,
    },
}

/// Iterator over one pass of a [`GraphStream`].
pub struct Pass<'a> {
    stream: &'a GraphStream,
    inner: PassInner<'a>,
    seen: u64,
    done: bool,
}

impl Iterator for Pass<'_> {
    type Item = Result<EdgeRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match &mut self.inner {
            PassInner::Memory { edges, order, pos } => {
                let idx = match order {
                    Some(o) => o.get(*pos).map(|&i| i as usize),
                    None => Some(*pos).filter(|&p| p < edges.len()),
                };
                *pos += 1;
                idx.map(|i| Ok(edges[i]))
            }
            PassInner::File { reader, line, buf } => {
                next_file_edge(reader, line, buf, self.stream.n_left, self.stream.n_right)
            }
        };
        match item {
            Some(Ok(e)) => {
                self.seen += 1;
                if self.seen > self.stream.m {
                    self.done = true;
                    return Some(Err(Error::StreamIntegrity(format!(
                        "pass yielded more than the declared {} edges",
                        self.stream.m
                    ))));
                }
                Some(Ok(e))
            }
            Some(Err(e)) => {
                self.done = true;
                Some(Err(e))
            }
            None => {
                self.done = true;
                if self.seen != self.stream.m {
                    Some(Err(Error::StreamIntegrity(format!(
                        "pass ended after {} of {} edges",
                        self.seen, self.stream.m
                    ))))
                } else {
                    None
                }
            }
        }
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('c') || t.starts_with('#')
}

fn read_header(reader: &mut impl BufRead) -> Result<(u32, u32, u64, usize)> {
    let mut buf = String::new();
    let mut line = 0;
    loop {
        buf.clear();
        line += 1;
        if reader.read_line(&mut buf)? == 0 {
            return Err(Error::Parse {
                line,
                msg: "missing `p bipartite` header".into(),
            });
        }
        if !is_skippable(&buf) {
            break;
        }
    }
    let toks: Vec<&str> = buf.split_whitespace().collect();
    let bad = |msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    if toks.len() != 5 || toks[0] != "p" || toks[1] != "bipartite" {
        return Err(bad("expected `p bipartite <n_left> <n_right> <m>`"));
    }
    let nl = toks[2].parse().map_err(|_| bad("bad n_left"))?;
    let nr = toks[3].parse().map_err(|_| bad("bad n_right"))?;
    let m = toks[4].parse().map_err(|_| bad("bad m"))?;
    Ok((nl, nr, m, line))
}

fn next_file_edge(
    reader: &mut BufReader<File>,
    line: &mut usize,
    buf: &mut String,
    n_left: u32,
    n_right: u32,
) -> Option<Result<EdgeRecord>> {
    loop {
        buf.clear();
        *line += 1;
        match reader.read_line(buf) {
            Ok(0) => return None,
            Ok(_) => {}
            Err(e) => return Some(Err(e.into())),
        }
        if !is_skippable(buf) {
            break;
        }
    }
    Some(parse_edge_line(buf, *line, n_left, n_right))
}

fn parse_edge_line(s: &str, line: usize, n_left: u32, n_right: u32) -> Result<EdgeRecord> {
    let bad = |msg: String| Error::StreamIntegrity(format!("line {line}: {msg}"));
    let toks: Vec<&str> = s.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "e" {
        return Err(bad("expected `e <u> <v> <w>`".into()));
    }
    let u: u32 = toks[1].parse().map_err(|_| bad("bad u".into()))?;
    let v: u32 = toks[2].parse().map_err(|_| bad("bad v".into()))?;
    let w: u64 = toks[3].parse().map_err(|_| bad("bad w".into()))?;
    if u == 0 || u > n_left || v == 0 || v > n_right {
        return Err(bad(format!("vertex ({u}, {v}) out of range")));
    }
    let (u, v) = (u - 1, v - 1);
    Ok(EdgeRecord {
        id: edge_id(u, v, n_right),
        u,
        v,
        w,
    })
}

/// Writes a graph in the `p bipartite` text format (1-based vertex ids).
pub fn write_graph(
    mut out: impl Write,
    n_left: u32,
    n_right: u32,
    edges: &[(u32, u32, u64)],
) -> std::io::Result<()> {
    writeln!(out, "p bipartite {} {} {}", n_left, n_right, edges.len())?;
    for &(u, v, w) in edges {
        writeln!(out, "e {} {} {}", u + 1, v + 1, w)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct StreamStats {
    pub n: usize,
    pub m: u64,
    pub w_max: u64,
}

/// Vertex count, edge count and largest weight in exactly one pass.
pub fn stream_stats(stream: &GraphStream) -> Result<StreamStats> {
    let mut m = 0u64;
    let mut w_max = 0u64;
    stream.for_each_edge(|e| {
        m += 1;
        w_max = w_max.max(e.w);
        Ok(())
    })?;
    Ok(StreamStats {
        n: stream.n(),
        m,
        w_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counter_ticks_on_open() {
        let g = GraphStream::from_edges(2, 2, &[(0, 0, 5), (1, 1, 7)]).unwrap();
        assert_eq!(g.passes(), 0);
        let recs: Vec<_> = g.open_pass().unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(g.passes(), 1);
    }

    #[test]
    fn stats_small() {
        let g = GraphStream::from_edges(2, 2, &[(0, 0, 5), (1, 1, 7)]).unwrap();
        assert_eq!(
            stream_stats(&g).unwrap(),
            StreamStats {
                n: 4,
                m: 2,
                w_max: 7
            }
        );
        assert_eq!(g.passes(), 1);
        let empty = GraphStream::from_edges(3, 1, &[]).unwrap();
        assert_eq!(
            stream_stats(&empty).unwrap(),
            StreamStats {
                n: 4,
                m: 0,
                w_max: 0
            }
        );
    }

    #[test]
    fn rejects_parallel_edges() {
        assert!(GraphStream::from_edges(2, 2, &[(0, 1, 1), (0, 1, 2)]).is_err());
        assert!(GraphStream::from_edges(2, 2, &[(2, 0, 1)]).is_err());
    }

    #[test]
    fn file_stream_counts_passes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.graph");
        let edges: Vec<(u32, u32, u64)> = (0..1000u32)
            .map(|i| (i / 40, i % 40, (i % 9) as u64))
            .collect();
        write_graph(File::create(&path).unwrap(), 25, 40, &edges).unwrap();
        let g = GraphStream::from_file(&path).unwrap();
        let mut all = Vec::new();
        for _ in 0..3 {
            all.push(g.collect_edges().unwrap());
        }
        assert_eq!(g.passes(), 3);
        assert_eq!(all[0].len(), 1000);
        assert!(all.windows(2).all(|p| p[0] == p[1]));
        assert_eq!(
            all[0][41],
            EdgeRecord {
                id: 41,
                u: 1,
                v: 1,
                w: 5
            }
        );
    }

    #[test]
    fn file_stream_detects_truncation_and_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let short = dir.path().join("short.graph");
        std::fs::write(&short, "p bipartite 2 2 3\ne 1 1 4\ne 2 2 1\n").unwrap();
        let g = GraphStream::from_file(&short).unwrap();
        assert!(matches!(g.collect_edges(), Err(Error::StreamIntegrity(_))));

        let junk = dir.path().join("junk.graph");
        std::fs::write(&junk, "c comment\np bipartite 2 2 1\ne 1 3 4\n").unwrap();
        let g = GraphStream::from_file(&junk).unwrap();
        assert!(matches!(g.collect_edges(), Err(Error::StreamIntegrity(_))));

        let nohdr = dir.path().join("nohdr.graph");
        std::fs::write(&nohdr, "e 1 1 1\n").unwrap();
        assert!(matches!(
            GraphStream::from_file(&nohdr),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn space_guard_tracks_peak() {
        let a = SpaceAuditor::new();
        {
            let _g1 = a.track(10);
            let _g2 = a.track(5);
            assert_eq!(a.live_words(), 15);
        }
        let _g3 = a.track(3);
        assert_eq!(a.live_words(), 3);
        assert_eq!(a.peak_words(), 15);
    }

    fn arb_graph() -> impl Strategy<Value = (u32, u32, Vec<(u32, u32, u64)>)> {
        (1u32..8, 1u32..8).prop_flat_map(|(nl, nr)| {
            let cells = (nl * nr) as usize;
            (
                Just(nl),
                Just(nr),
                proptest::collection::vec((any::<bool>(), 0u64..20), cells),
            )
                .prop_map(|(nl, nr, cells)| {
                    let edges = cells
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.0)
                        .map(|(i, c)| (i as u32 / nr, i as u32 % nr, c.1))
                        .collect();
                    (nl, nr, edges)
                })
        })
    }

    proptest! {
        #[test]
        fn replay_is_deterministic((nl, nr, edges) in arb_graph(), seed in any::<u64>()) {
            let g = GraphStream::from_edges(nl, nr, &edges).unwrap().with_shuffled_passes(seed);
            let mut a = g.collect_edges().unwrap();
            let mut b = g.collect_edges().unwrap();
            a.sort();
            b.sort();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(g.passes(), 2);
            let s = stream_stats(&g).unwrap();
            prop_assert_eq!(s.m as usize, edges.len());
            prop_assert_eq!(s.w_max, edges.iter().map(|e| e.2).max().unwrap_or(0));
        }
    }
}
