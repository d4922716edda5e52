//! Instance files: versioned JSON with string-encoded rationals.

use std::fmt;

use anyhow::{anyhow, bail, Context, Result};
use pricing_core::apps::{
    Commodity, CongestionSpec, CostTables, ExternalityMarket, KellyPlayer, KellySpec, MarketSpec, PlayerStrategies,
    TradeSpec, Valuation, WardropSpec,
};
use pricing_core::duality::Mode;
use pricing_core::game::{
    CoefficientFn, ConsumptionMap, CostModel, Digraph, FlowSpace, FlowValue, Instance, StrategySpace, Utility,
};
use pricing_core::lp::Sense;
use pricing_core::polymatroid::RankOracle;
use pricing_core::rat::parse_rat;
use pricing_core::{Rat, RatVec};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const VERSION: u32 = 1;

/// An exact rational, written as `"p/q"`, `"p"` or a JSON integer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct R(pub Rat);

impl Serialize for R {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for R {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = R;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\" or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<R, E> {
                parse_rat(v).map(R).ok_or_else(|| E::custom(format!("invalid rational {v:?}")))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<R, E> {
                Ok(R(Rat::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<R, E> {
                Ok(R(Rat::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<R, E> {
                Err(E::custom(format!("floating-point number {v} where an exact rational is required")))
            }
        }
        d.deserialize_any(V)
    }
}

impl From<Rat> for R {
    fn from(r: Rat) -> Self {
        R(r)
    }
}

impl From<i64> for R {
    fn from(v: i64) -> Self {
        R(Rat::from_integer(v.into()))
    }
}

pub fn rats(v: &[R]) -> RatVec {
    v.iter().map(|r| r.0.clone()).collect()
}

pub fn wrap(v: &[Rat]) -> Vec<R> {
    v.iter().cloned().map(R).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeTag {
    Enforce,
    WeakMarket,
    Unique,
}

impl From<ModeTag> for Mode {
    fn from(m: ModeTag) -> Mode {
        match m {
            ModeTag::Enforce => Mode::Enforce,
            ModeTag::WeakMarket => Mode::WeakMarket,
            ModeTag::Unique => Mode::Unique,
        }
    }
}

impl From<Mode> for ModeTag {
    fn from(m: Mode) -> ModeTag {
        match m {
            Mode::Enforce => ModeTag::Enforce,
            Mode::WeakMarket => ModeTag::WeakMarket,
            Mode::Unique => ModeTag::Unique,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SenseTag {
    Min,
    Max,
}

impl From<SenseTag> for Sense {
    fn from(s: SenseTag) -> Sense {
        match s {
            SenseTag::Min => Sense::Min,
            SenseTag::Max => Sense::Max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: u32,
    #[serde(flatten)]
    pub body: Body,
    /// Required for generic, congestion, wardrop and polymatroid files; the
    /// other domains derive it from the spec.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<R>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "domain", content = "spec", rename_all = "kebab-case")]
pub enum Body {
    Generic(GenericFile),
    Congestion(CongestionFile),
    Wardrop(WardropFile),
    Walrasian(WalrasianFile),
    Trading(TradingFile),
    Kelly(KellyFile),
    Polymatroid(PolymatroidFile),
}

impl Body {
    pub fn tag(&self) -> &'static str {
        match self {
            Body::Generic(_) => "generic",
            Body::Congestion(_) => "congestion",
            Body::Wardrop(_) => "wardrop",
            Body::Walrasian(_) => "walrasian",
            Body::Trading(_) => "trading",
            Body::Kelly(_) => "kelly",
            Body::Polymatroid(_) => "polymatroid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericFile {
    pub sense: SenseTag,
    pub players: Vec<PlayerFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerFile {
    pub space: SpaceFile,
    pub cost: CostFile,
    /// Rows of `G_i`; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumption: Option<Vec<Vec<R>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceFile {
    Finite(Vec<Vec<R>>),
    ConcaveHull(Vec<Vec<R>>),
    PolymatroidBase(RankFile),
    PolymatroidVectors(RankFile),
    Flow(FlowFile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankFile {
    pub m: usize,
    /// `f(S)` indexed by the bitmask of `S`.
    pub table: Vec<i64>,
}

impl RankFile {
    pub fn oracle(&self) -> Result<RankOracle> {
        Ok(RankOracle::from_table(self.m, self.table.clone())?)
    }

    pub fn of(f: &RankOracle) -> Self {
        RankFile { m: f.ground_size(), table: f.table().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: usize,
    pub arcs: Vec<(usize, usize)>,
}

impl GraphFile {
    pub fn digraph(&self) -> Digraph {
        Digraph::new(self.nodes, self.arcs.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowValueFile {
    Fixed(R),
    UpTo(Option<R>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowFile {
    pub graph: GraphFile,
    pub source: usize,
    pub sink: usize,
    pub value: FlowValueFile,
    #[serde(default)]
    pub integral: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostFile {
    /// One value per listed point, in order.
    Tabulated(Vec<R>),
    Linear(Vec<CoefficientFile>),
    FlowUtility(UtilityFile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientFile {
    Const(R),
    Poly { resource: usize, coeffs: Vec<R> },
    Table { resource: usize, points: Vec<(R, R)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityFile {
    Linear(R),
    CappedLinear { rate: R, cap: R },
    Piecewise(Vec<(R, R)>),
}

impl UtilityFile {
    pub fn utility(&self) -> Utility {
        match self {
            UtilityFile::Linear(a) => Utility::Linear(a.0.clone()),
            UtilityFile::CappedLinear { rate, cap } => Utility::CappedLinear { rate: rate.0.clone(), cap: cap.0.clone() },
            UtilityFile::Piecewise(p) => Utility::Piecewise(p.iter().map(|(z, u)| (z.0.clone(), u.0.clone())).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongestionFile {
    pub resources: usize,
    pub players: Vec<CongestionPlayerFile>,
    pub costs: CostTablesFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<R>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CongestionPlayerFile {
    Subsets(Vec<Vec<usize>>),
    Network { graph: GraphFile, source: usize, sink: usize },
    Matroid(RankFile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostTablesFile {
    Homogeneous(Vec<Vec<R>>),
    PlayerSpecific(Vec<Vec<Vec<R>>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WardropFile {
    pub graph: GraphFile,
    pub commodities: Vec<CommodityFile>,
    pub costs: Vec<Vec<R>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommodityFile {
    pub source: usize,
    pub sink: usize,
    pub demand: R,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalrasianFile {
    pub multiplicities: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub buyers: Vec<ValuationFile>,
    /// Multi-unit buyers with consumption externalities, instead of `buyers`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub externalities: Option<ExternalityFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValuationFile {
    Additive(Vec<R>),
    UnitDemand(Vec<R>),
    SingleMinded { bundle: Vec<usize>, value: R },
    Table(Vec<R>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalityFile {
    pub ranks: Vec<RankFile>,
    /// `[buyer][item][z]`
    pub values: Vec<Vec<Vec<R>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradingFile {
    pub players: usize,
    pub edges: Vec<(usize, usize)>,
    pub valuations: Vec<Vec<R>>,
    #[serde(default)]
    pub buyer_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KellyFile {
    pub graph: GraphFile,
    pub capacities: Vec<R>,
    pub players: Vec<KellyPlayerFile>,
    #[serde(default)]
    pub integral: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KellyPlayerFile {
    pub source: usize,
    pub sink: usize,
    pub utility: UtilityFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolymatroidFile {
    pub sense: SenseTag,
    pub players: Vec<PolymatroidPlayerFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolymatroidPlayerFile {
    pub rank: RankFile,
    /// `π_ij` (min) or `v_ij` (max) per resource.
    pub weights: Vec<R>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(text).context("malformed instance file")?;
        if f.version != VERSION {
            bail!("unsupported instance file version {} (expected {VERSION})", f.version);
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    pub fn target(&self) -> Result<RatVec> {
        self.target.as_deref().map(rats).ok_or_else(|| anyhow!("{} files need a target", self.body.tag()))
    }
}

impl GenericFile {
    pub fn instance(&self, target: RatVec) -> Result<Instance> {
        let mut spaces = Vec::with_capacity(self.players.len());
        let mut costs = Vec::with_capacity(self.players.len());
        let mut consumption = Vec::with_capacity(self.players.len());
        for (i, p) in self.players.iter().enumerate() {
            let space = match &p.space {
                SpaceFile::Finite(pts) => StrategySpace::FinitePoints(pts.iter().map(|x| rats(x)).collect()),
                SpaceFile::ConcaveHull(pts) => StrategySpace::ConcaveHullPoints(pts.iter().map(|x| rats(x)).collect()),
                SpaceFile::PolymatroidBase(f) => StrategySpace::PolymatroidBase(f.oracle()?),
                SpaceFile::PolymatroidVectors(f) => StrategySpace::PolymatroidVectors(f.oracle()?),
                SpaceFile::Flow(fl) => StrategySpace::FlowPolytope(FlowSpace {
                    graph: fl.graph.digraph(),
                    source: fl.source,
                    sink: fl.sink,
                    value: match &fl.value {
                        FlowValueFile::Fixed(d) => FlowValue::Fixed(d.0.clone()),
                        FlowValueFile::UpTo(c) => FlowValue::UpTo(c.as_ref().map(|c| c.0.clone())),
                    },
                    integral: fl.integral,
                }),
            };
            let cost = match &p.cost {
                CostFile::Tabulated(vals) => {
                    let pts = match &p.space {
                        SpaceFile::Finite(pts) | SpaceFile::ConcaveHull(pts) => pts,
                        _ => bail!("player {i}: tabulated costs need a listed strategy space"),
                    };
                    if pts.len() != vals.len() {
                        bail!("player {i}: {} points but {} tabulated values", pts.len(), vals.len());
                    }
                    CostModel::Tabulated(pts.iter().zip(vals).map(|(x, v)| (rats(x), v.0.clone())).collect())
                }
                CostFile::Linear(cs) => CostModel::PerResourceLinear(
                    cs.iter()
                        .map(|c| match c {
                            CoefficientFile::Const(v) => CoefficientFn::Const(v.0.clone()),
                            CoefficientFile::Poly { resource, coeffs } => {
                                CoefficientFn::Poly { resource: *resource, coeffs: rats(coeffs) }
                            }
                            CoefficientFile::Table { resource, points } => CoefficientFn::Table {
                                resource: *resource,
                                points: points.iter().map(|(z, v)| (z.0.clone(), v.0.clone())).collect(),
                            },
                        })
                        .collect(),
                ),
                CostFile::FlowUtility(u) => CostModel::FlowValueUtility(u.utility()),
            };
            spaces.push(space);
            costs.push(cost);
            consumption.push(match &p.consumption {
                None => ConsumptionMap::identity(),
                Some(rows) => ConsumptionMap::matrix(rows.iter().map(|r| rats(r)).collect()),
            });
        }
        let inst = Instance {
            sense: self.sense.into(),
            m: target.len(),
            spaces,
            consumption,
            costs,
            target,
        };
        inst.validate()?;
        Ok(inst)
    }
}

impl CongestionFile {
    pub fn spec(&self) -> Result<CongestionSpec> {
        let players = self
            .players
            .iter()
            .map(|p| {
                Ok(match p {
                    CongestionPlayerFile::Subsets(s) => PlayerStrategies::Subsets(s.clone()),
                    CongestionPlayerFile::Network { graph, source, sink } => {
                        PlayerStrategies::Network { graph: graph.digraph(), source: *source, sink: *sink }
                    }
                    CongestionPlayerFile::Matroid(f) => PlayerStrategies::Matroid(f.oracle()?),
                })
            })
            .collect::<Result<_>>()?;
        let costs = match &self.costs {
            CostTablesFile::Homogeneous(t) => CostTables::Homogeneous(t.iter().map(|r| rats(r)).collect()),
            CostTablesFile::PlayerSpecific(t) => {
                CostTables::PlayerSpecific(t.iter().map(|p| p.iter().map(|r| rats(r)).collect()).collect())
            }
        };
        Ok(CongestionSpec { resources: self.resources, players, costs, weights: self.weights.as_deref().map(rats) })
    }
}

impl WardropFile {
    pub fn spec(&self) -> WardropSpec {
        WardropSpec {
            graph: self.graph.digraph(),
            commodities: self
                .commodities
                .iter()
                .map(|c| Commodity { source: c.source, sink: c.sink, demand: c.demand.0.clone() })
                .collect(),
            costs: self.costs.iter().map(|r| rats(r)).collect(),
        }
    }
}

pub enum Market {
    Bundles(MarketSpec),
    Externalities(ExternalityMarket),
}

impl WalrasianFile {
    pub fn market(&self) -> Result<Market> {
        match (&self.externalities, self.buyers.is_empty()) {
            (Some(_), false) => bail!("walrasian files take either buyers or externalities, not both"),
            (Some(x), true) => Ok(Market::Externalities(ExternalityMarket {
                multiplicities: self.multiplicities.clone(),
                ranks: x.ranks.iter().map(RankFile::oracle).collect::<Result<_>>()?,
                values: x.values.iter().map(|b| b.iter().map(|t| rats(t)).collect()).collect(),
            })),
            (None, _) => Ok(Market::Bundles(MarketSpec {
                multiplicities: self.multiplicities.clone(),
                buyers: self
                    .buyers
                    .iter()
                    .map(|b| match b {
                        ValuationFile::Additive(v) => Valuation::Additive(rats(v)),
                        ValuationFile::UnitDemand(v) => Valuation::UnitDemand(rats(v)),
                        ValuationFile::SingleMinded { bundle, value } => {
                            Valuation::SingleMinded { bundle: bundle.clone(), value: value.0.clone() }
                        }
                        ValuationFile::Table(t) => Valuation::Table(rats(t)),
                    })
                    .collect(),
            })),
        }
    }
}

impl TradingFile {
    pub fn spec(&self) -> TradeSpec {
        TradeSpec {
            players: self.players,
            edges: self.edges.clone(),
            valuations: self.valuations.iter().map(|v| rats(v)).collect(),
            buyer_monotone: self.buyer_monotone,
        }
    }
}

impl KellyFile {
    pub fn spec(&self) -> KellySpec {
        KellySpec {
            graph: self.graph.digraph(),
            capacities: rats(&self.capacities),
            players: self
                .players
                .iter()
                .map(|p| KellyPlayer { source: p.source, sink: p.sink, utility: p.utility.utility() })
                .collect(),
            integral: self.integral,
        }
    }
}

impl PolymatroidFile {
    pub fn instance(&self, target: RatVec) -> Result<Instance> {
        let sense: Sense = self.sense.into();
        let mut spaces = Vec::with_capacity(self.players.len());
        let mut costs = Vec::with_capacity(self.players.len());
        for p in &self.players {
            let f = p.rank.oracle()?;
            spaces.push(match sense {
                Sense::Min => StrategySpace::PolymatroidBase(f),
                Sense::Max => StrategySpace::PolymatroidVectors(f),
            });
            costs.push(CostModel::PerResourceLinear(p.weights.iter().map(|w| CoefficientFn::Const(w.0.clone())).collect()));
        }
        Ok(Instance::new(sense, spaces, costs, target)?)
    }
}
