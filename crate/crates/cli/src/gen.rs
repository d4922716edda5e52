//! Deterministic instance families for test corpora.

use anyhow::{bail, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::schema::*;

pub const FAMILIES: [&str; 10] = [
    "random-finite",
    "congestion-parallel",
    "congestion-matroid",
    "walrasian-additive",
    "walrasian-unitdemand",
    "walrasian-singleminded",
    "trading-chain",
    "kelly-dag",
    "kelly-gadget",
    "polymatroid-uniform",
];

/// Optional size knobs; each family documents its own defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Size {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
}

pub fn generate(family: &str, seed: u64, size: &Size) -> Result<InstanceFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rng = &mut rng;
    let f = match family {
        "random-finite" => random_finite(rng, size.n.unwrap_or(2), size.m.unwrap_or(3), size.k.unwrap_or(4)),
        "congestion-parallel" => congestion_parallel(rng, size.n.unwrap_or(3), size.m.unwrap_or(2)),
        "congestion-matroid" => congestion_matroid(rng, size.n.unwrap_or(2), size.m.unwrap_or(3)),
        "walrasian-additive" => walrasian(rng, size.n.unwrap_or(2), size.m.unwrap_or(3), false),
        "walrasian-unitdemand" => walrasian(rng, size.n.unwrap_or(2), size.m.unwrap_or(3), true),
        "walrasian-singleminded" => single_minded(),
        "trading-chain" => trading_chain(rng, size.n.unwrap_or(3)),
        "kelly-dag" => kelly_dag(rng, size.n.unwrap_or(2), size.m.unwrap_or(5)),
        "kelly-gadget" => kelly_gadget(),
        "polymatroid-uniform" => polymatroid_uniform(rng, size.n.unwrap_or(2), size.m.unwrap_or(3)),
        other => bail!("unknown family {other:?}; expected one of {}", FAMILIES.join(", ")),
    };
    Ok(f)
}

fn rat(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> R {
    let q = rng.gen_range(1..=3i64);
    R(pricing_core::rat::frac(rng.gen_range(lo * q..=hi * q), q))
}

fn file(body: Body, target: Option<Vec<R>>, mode: Option<ModeTag>) -> InstanceFile {
    InstanceFile { version: VERSION, body, target, mode }
}

/// Listed strategies with small integral coordinates and rational costs;
/// the target is the load of a random profile.
fn random_finite(rng: &mut ChaCha8Rng, n: usize, m: usize, k: usize) -> InstanceFile {
    let sense = if rng.gen_bool(0.5) { SenseTag::Min } else { SenseTag::Max };
    let mut players = Vec::with_capacity(n);
    let mut target = vec![0i64; m];
    for _ in 0..n {
        let mut pts: Vec<Vec<i64>> = Vec::new();
        while pts.len() < k.max(1) {
            let p: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=2)).collect();
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let chosen = &pts[rng.gen_range(0..pts.len())];
        for (t, c) in target.iter_mut().zip(chosen) {
            *t += c;
        }
        let costs = pts.iter().map(|_| rat(rng, 0, 6)).collect();
        players.push(PlayerFile {
            space: SpaceFile::Finite(pts.iter().map(|p| p.iter().map(|&v| R::from(v)).collect()).collect()),
            cost: CostFile::Tabulated(costs),
            consumption: None,
        });
    }
    file(
        Body::Generic(GenericFile { sense, players }),
        Some(target.into_iter().map(R::from).collect()),
        Some(ModeTag::Enforce),
    )
}

/// Nondecreasing integer table `c(0..=len-1)`.
fn increasing_table(rng: &mut ChaCha8Rng, len: usize) -> Vec<R> {
    let mut v = rng.gen_range(0..=2i64);
    (0..len)
        .map(|_| {
            let out = v;
            v += rng.gen_range(0..=3);
            R::from(out)
        })
        .collect()
}

fn congestion_parallel(rng: &mut ChaCha8Rng, n: usize, m: usize) -> InstanceFile {
    let costs = (0..m).map(|_| increasing_table(rng, n + 1)).collect();
    let mut target = vec![0i64; m];
    for _ in 0..n {
        target[rng.gen_range(0..m)] += 1;
    }
    file(
        Body::Congestion(CongestionFile {
            resources: m,
            players: vec![CongestionPlayerFile::Subsets((0..m).map(|j| vec![j]).collect()); n],
            costs: CostTablesFile::Homogeneous(costs),
            weights: None,
        }),
        Some(target.into_iter().map(R::from).collect()),
        Some(ModeTag::Enforce),
    )
}

fn uniform_table(m: usize, k: i64) -> RankFile {
    RankFile { m, table: (0..1u32 << m).map(|s| (s.count_ones() as i64).min(k)).collect() }
}

/// Bases of uniform matroids with player-specific tables; the target is the
/// load of a random base profile.
fn congestion_matroid(rng: &mut ChaCha8Rng, n: usize, m: usize) -> InstanceFile {
    let mut players = Vec::with_capacity(n);
    let mut target = vec![0i64; m];
    for _ in 0..n {
        let k = rng.gen_range(1..=m.max(1)) as i64;
        let mut items: Vec<usize> = (0..m).collect();
        items.shuffle(rng);
        for &j in &items[..k as usize] {
            target[j] += 1;
        }
        players.push(CongestionPlayerFile::Matroid(uniform_table(m, k)));
    }
    let costs = (0..n).map(|_| (0..m).map(|_| increasing_table(rng, n + 1)).collect()).collect();
    file(
        Body::Congestion(CongestionFile {
            resources: m,
            players,
            costs: CostTablesFile::PlayerSpecific(costs),
            weights: None,
        }),
        Some(target.into_iter().map(R::from).collect()),
        Some(ModeTag::Enforce),
    )
}

fn walrasian(rng: &mut ChaCha8Rng, n: usize, m: usize, unit_demand: bool) -> InstanceFile {
    let multiplicities = (0..m).map(|_| rng.gen_range(1..=2)).collect();
    let buyers = (0..n)
        .map(|_| {
            let v: Vec<R> = (0..m).map(|_| R::from(rng.gen_range(0..=10))).collect();
            if unit_demand {
                ValuationFile::UnitDemand(v)
            } else {
                ValuationFile::Additive(v)
            }
        })
        .collect();
    file(Body::Walrasian(WalrasianFile { multiplicities, buyers, externalities: None }), None, Some(ModeTag::WeakMarket))
}

/// Items `{a, b}`: one buyer wants both for 3, the other either for 2.
fn single_minded() -> InstanceFile {
    file(
        Body::Walrasian(WalrasianFile {
            multiplicities: vec![1, 1],
            buyers: vec![
                ValuationFile::SingleMinded { bundle: vec![0, 1], value: R::from(3) },
                ValuationFile::UnitDemand(vec![R::from(2), R::from(2)]),
            ],
            externalities: None,
        }),
        None,
        Some(ModeTag::WeakMarket),
    )
}

/// Players `0 → 1 → … → n-1`; ends sell at a cost and buy at a value, middle
/// players value buying and reselling together at least as much as apart.
fn trading_chain(rng: &mut ChaCha8Rng, n: usize) -> InstanceFile {
    let n = n.max(2);
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    let mut valuations = Vec::with_capacity(n);
    valuations.push(vec![R::from(0), R::from(-rng.gen_range(0..=5i64))]);
    for _ in 1..n - 1 {
        // bit 0: buy from the left, bit 1: sell to the right
        let buy = -rng.gen_range(0..=4i64);
        let sell = -rng.gen_range(0..=4i64);
        let both = buy + sell + rng.gen_range(0..=6i64);
        valuations.push(vec![R::from(0), R::from(buy), R::from(sell), R::from(both)]);
    }
    valuations.push(vec![R::from(0), R::from(rng.gen_range(0..=8i64))]);
    let buyer_monotone = n == 2;
    let mode = if buyer_monotone { ModeTag::Enforce } else { ModeTag::WeakMarket };
    file(Body::Trading(TradingFile { players: n, edges, valuations, buyer_monotone }), None, Some(mode))
}

/// Single source `0` over a random DAG containing the path `0 → 1 → … `,
/// integral capacities and identical linear utilities.
fn kelly_dag(rng: &mut ChaCha8Rng, n: usize, nodes: usize) -> InstanceFile {
    let nodes = nodes.max(2);
    let mut arcs: Vec<(usize, usize)> = (0..nodes - 1).map(|v| (v, v + 1)).collect();
    for a in 0..nodes {
        for b in a + 2..nodes {
            if rng.gen_bool(0.35) {
                arcs.push((a, b));
            }
        }
    }
    let capacities = arcs.iter().map(|_| R::from(rng.gen_range(1..=3))).collect();
    let rate = R::from(rng.gen_range(1..=5));
    let players = (0..n.max(1))
        .map(|_| KellyPlayerFile { source: 0, sink: rng.gen_range(1..nodes), utility: UtilityFile::Linear(rate.clone()) })
        .collect();
    file(
        Body::Kelly(KellyFile { graph: GraphFile { nodes, arcs }, capacities, players, integral: true }),
        None,
        Some(ModeTag::WeakMarket),
    )
}

/// Two commodities whose integral routes must share an arc of capacity 1.
pub fn kelly_gadget() -> InstanceFile {
    // s1 s2 t1 t2 a1..a4 b1..b4
    let (s1, s2, t1, t2) = (0, 1, 2, 3);
    let a = |k: usize| 3 + k;
    let b = |k: usize| 7 + k;
    let arcs = vec![
        (s1, a(1)),
        (a(1), b(1)),
        (b(1), a(2)),
        (a(2), b(2)),
        (b(2), t1),
        (s1, a(3)),
        (a(3), b(3)),
        (b(3), a(4)),
        (a(4), b(4)),
        (b(4), t1),
        (s2, a(1)),
        (b(1), a(3)),
        (b(3), t2),
        (s2, a(2)),
        (b(2), a(4)),
        (b(4), t2),
    ];
    let util = UtilityFile::CappedLinear { rate: R::from(1), cap: R::from(1) };
    file(
        Body::Kelly(KellyFile {
            capacities: vec![R::from(1); arcs.len()],
            graph: GraphFile { nodes: 12, arcs },
            players: vec![
                KellyPlayerFile { source: s1, sink: t1, utility: util.clone() },
                KellyPlayerFile { source: s2, sink: t2, utility: util },
            ],
            integral: true,
        }),
        None,
        Some(ModeTag::WeakMarket),
    )
}

fn polymatroid_uniform(rng: &mut ChaCha8Rng, n: usize, m: usize) -> InstanceFile {
    let sense = if rng.gen_bool(0.5) { SenseTag::Min } else { SenseTag::Max };
    let mut players = Vec::with_capacity(n);
    let mut target = vec![0i64; m];
    for _ in 0..n {
        let k = rng.gen_range(1..=m.max(1)) as i64;
        let mut items: Vec<usize> = (0..m).collect();
        items.shuffle(rng);
        let take = if sense == SenseTag::Min { k as usize } else { rng.gen_range(0..=k as usize) };
        for &j in &items[..take] {
            target[j] += 1;
        }
        let weights = (0..m).map(|_| R::from(rng.gen_range(0..=9))).collect();
        players.push(PolymatroidPlayerFile { rank: uniform_table(m, k), weights });
    }
    file(
        Body::Polymatroid(PolymatroidFile { sense, players }),
        Some(target.into_iter().map(R::from).collect()),
        None,
    )
}
