//! Acceptance suite: one PASS/FAIL line per criterion, checked against brute
//! force oracles written independently of the library's solvers.

use std::process::ExitCode;
use std::time::Instant;

use pricing_cli::commands::{check_report, enforce_file, CheckResult, Options, EXIT_CERTIFICATE, EXIT_WITNESS};
use pricing_cli::gen::{generate, kelly_gadget, Size};
use pricing_cli::report::Report;
use pricing_cli::schema::*;
use pricing_core::aggregative::lift_certificate;
use pricing_core::apps::{build_congestion, CongestionSpec, CostTables, PlayerStrategies};
use pricing_core::convexify::{enforce, envelope_value, Outcome};
use pricing_core::duality::{check_enforceable, dual_value, Mode, Verdict};
use pricing_core::game::{CoefficientFn, CostModel, Instance, StrategySpace, DEFAULT_CAP};
use pricing_core::lp::{self, LpProblem, LpStatus, RowKind, Sense};
use pricing_core::polymatroid::{enforce_polymatroid, lift, PolymatroidOutcome, RankOracle};
use pricing_core::rat::{dot, frac, int, is_integer, zero};
use pricing_core::{Error, Rat, RatVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: String) -> Line {
    Line { pass, detail }
}

fn better(sense: Sense, a: &Rat, b: &Rat) -> bool {
    match sense {
        Sense::Min => a < b,
        Sense::Max => a > b,
    }
}

/// Calls `f` with one index per list for every combination.
fn each_profile(sizes: &[usize], f: &mut dyn FnMut(&[usize])) {
    if sizes.iter().any(|&s| s == 0) {
        return;
    }
    let mut idx = vec![0; sizes.len()];
    loop {
        f(&idx);
        let mut p = 0;
        loop {
            if p == sizes.len() {
                return;
            }
            idx[p] += 1;
            if idx[p] < sizes[p] {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

fn sum_vecs(m: usize, vs: &[&RatVec]) -> RatVec {
    let mut load = vec![zero(); m];
    for v in vs {
        for j in 0..m {
            load[j] += &v[j];
        }
    }
    load
}

/// A game given by explicit strategy lists, checked by enumeration.
struct Game<'a> {
    sense: Sense,
    target: RatVec,
    strategies: Vec<Vec<RatVec>>,
    /// Cost (or value) of `point` for `player` at `load`.
    cost: Box<dyn Fn(usize, &[Rat], &[Rat]) -> Rat + 'a>,
    /// Deviations are charged at the load they produce.
    aggregative: bool,
}

impl Game<'_> {
    fn priced(&self, i: usize, load: &[Rat], y: &[Rat], lambda: &[Rat]) -> Rat {
        let c = (self.cost)(i, load, y);
        match self.sense {
            Sense::Min => c + dot(lambda, y),
            Sense::Max => c - dot(lambda, y),
        }
    }

    fn verify(&self, x: &[RatVec], lambda: &[Rat], mode: Mode) -> Result<(), String> {
        let m = self.target.len();
        if lambda.len() != m || x.len() != self.strategies.len() {
            return Err("shape mismatch".into());
        }
        if let Some(j) = (0..m).find(|&j| lambda[j] < zero()) {
            return Err(format!("negative price on {j}"));
        }
        for (i, xi) in x.iter().enumerate() {
            if !self.strategies[i].contains(xi) {
                return Err(format!("player {i} plays a non-strategy"));
            }
        }
        let load = sum_vecs(m, &x.iter().collect::<Vec<_>>());
        match mode {
            Mode::Enforce => {
                if load != self.target {
                    return Err("load differs from target".into());
                }
            }
            Mode::WeakMarket => {
                for j in 0..m {
                    if load[j] > self.target[j] {
                        return Err(format!("resource {j} overloaded"));
                    }
                    if load[j] < self.target[j] && lambda[j] != zero() {
                        return Err(format!("resource {j} has slack and a price"));
                    }
                }
            }
            Mode::Unique => return Err("uniqueness is outside this oracle".into()),
        }
        for (i, xi) in x.iter().enumerate() {
            let at = if self.aggregative { load.clone() } else { self.target.clone() };
            let cur = self.priced(i, &at, xi, lambda);
            for y in &self.strategies[i] {
                let l: RatVec = if self.aggregative {
                    (0..m).map(|j| &load[j] - &xi[j] + &y[j]).collect()
                } else {
                    self.target.clone()
                };
                if better(self.sense, &self.priced(i, &l, y, lambda), &cur) {
                    return Err(format!("player {i} improves by deviating"));
                }
            }
        }
        Ok(())
    }
}

fn rand_rat(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rat {
    let q = rng.gen_range(1..=3i64);
    frac(rng.gen_range(lo * q..=hi * q), q)
}

fn mask_vec(mask: u32, m: usize) -> RatVec {
    (0..m).map(|j| int((mask >> j & 1) as i64)).collect()
}

// ---------------------------------------------------------------- criteria 1, 2

struct Finite {
    sense: Sense,
    points: Vec<Vec<RatVec>>,
    costs: Vec<RatVec>,
    target: RatVec,
}

impl Finite {
    fn random(rng: &mut ChaCha8Rng) -> Finite {
        let sense = if rng.gen_bool(0.5) { Sense::Min } else { Sense::Max };
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=4usize);
        let most = 3usize.pow(m as u32);
        let mut points = Vec::new();
        let mut costs = Vec::new();
        let mut target = vec![zero(); m];
        for _ in 0..n {
            let k = rng.gen_range(1..=6usize).min(most);
            let mut pts: Vec<RatVec> = Vec::new();
            while pts.len() < k {
                let p: RatVec = (0..m).map(|_| int(rng.gen_range(0..=2))).collect();
                if !pts.contains(&p) {
                    pts.push(p);
                }
            }
            let pick = &pts[rng.gen_range(0..k)];
            for j in 0..m {
                target[j] += &pick[j];
            }
            costs.push((0..k).map(|_| rand_rat(rng, 0, 6)).collect());
            points.push(pts);
        }
        if rng.gen_bool(0.3) {
            let j = rng.gen_range(0..m);
            target[j] += int(1);
        }
        Finite { sense, points, costs, target }
    }

    fn instance(&self) -> Instance {
        Instance::new(
            self.sense,
            self.points.iter().map(|p| StrategySpace::FinitePoints(p.clone())).collect(),
            self.points
                .iter()
                .zip(&self.costs)
                .map(|(p, c)| CostModel::Tabulated(p.iter().cloned().zip(c.iter().cloned()).collect()))
                .collect(),
            self.target.clone(),
        )
        .expect("valid random instance")
    }

    fn game(&self) -> Game<'_> {
        Game {
            sense: self.sense,
            target: self.target.clone(),
            strategies: self.points.clone(),
            cost: Box::new(move |i, _, y| {
                let k = self.points[i].iter().position(|p| p.as_slice() == y).expect("listed point");
                self.costs[i][k].clone()
            }),
            aggregative: false,
        }
    }

    /// Configuration LP value, built and solved here from the raw data.
    fn lp_value(&self) -> Option<Rat> {
        let m = self.target.len();
        let obj: RatVec = self.costs.iter().flatten().cloned().collect();
        let nv = obj.len();
        let mut p = LpProblem::new(self.sense, obj);
        for j in 0..m {
            let row: RatVec = self.points.iter().flatten().map(|x| x[j].clone()).collect();
            p.add_row(row, RowKind::Le, self.target[j].clone());
        }
        let mut start = 0;
        for pts in &self.points {
            let row: RatVec = (0..nv).map(|v| int((v >= start && v < start + pts.len()) as i64)).collect();
            p.add_row(row, RowKind::Eq, int(1));
            start += pts.len();
        }
        let sol = lp::solve(&p).expect("LP solves");
        (sol.status == LpStatus::Optimal).then_some(sol.value)
    }
}

fn criteria_1_2() -> (Line, Line) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let total = 500;
    let (mut agree, mut certs, mut witnesses) = (0, 0, 0);
    let (mut duality_ok, mut masters) = (0, 0);
    let mut first_error: Option<String> = None;
    for case in 0..total {
        let f = Finite::random(&mut rng);
        let inst = f.instance();
        let game = f.game();
        let m = f.target.len();
        let Some(lp_value) = f.lp_value() else {
            first_error.get_or_insert(format!("case {case}: LP infeasible"));
            continue;
        };
        let sizes: Vec<usize> = f.points.iter().map(Vec::len).collect();
        let mut tight_opt: Vec<Vec<RatVec>> = Vec::new();
        let mut bound_broken = false;
        each_profile(&sizes, &mut |idx| {
            let prof: Vec<&RatVec> = idx.iter().enumerate().map(|(i, &k)| &f.points[i][k]).collect();
            let load = sum_vecs(m, &prof);
            if load.iter().zip(&f.target).any(|(l, u)| l > u) {
                return;
            }
            let val: Rat = idx.iter().enumerate().map(|(i, &k)| f.costs[i][k].clone()).sum();
            if better(f.sense, &val, &lp_value) {
                bound_broken = true;
            }
            if load == f.target && val == lp_value {
                tight_opt.push(prof.into_iter().cloned().collect());
            }
        });
        let out = match enforce(&inst, Mode::Enforce) {
            Ok(o) => o,
            Err(e) => {
                first_error.get_or_insert(format!("case {case}: {e}"));
                continue;
            }
        };
        let verdict_ok = match &out {
            Outcome::Certificate { certificate: c, master } => {
                certs += 1;
                !tight_opt.is_empty()
                    && tight_opt.contains(&c.x_star)
                    && game.verify(&c.x_star, &c.prices, Mode::Enforce).is_ok()
                    && tight_opt.iter().all(|x| game.verify(x, &master.lambda, Mode::Enforce).is_ok())
            }
            Outcome::FractionalWitness(_) => {
                witnesses += 1;
                tight_opt.is_empty()
            }
            _ => false,
        };
        let master = out.master();
        if verdict_ok && !bound_broken && master.is_some_and(|s| s.value == lp_value) {
            agree += 1;
        } else {
            first_error.get_or_insert(format!("case {case}: verdict {} disagrees with enumeration", out.label()));
        }
        if let Some(s) = master {
            masters += 1;
            let own: Rat = (0..f.points.len())
                .map(|i| {
                    let vals: Vec<Rat> =
                        f.points[i].iter().map(|y| game.priced(i, &f.target, y, &s.lambda)).collect();
                    vals.into_iter().reduce(|a, b| if better(f.sense, &b, &a) { b } else { a }).unwrap()
                })
                .sum();
            let lu = dot(&s.lambda, &f.target);
            let own = match f.sense {
                Sense::Min => own - lu,
                Sense::Max => own + lu,
            };
            let lib = dual_value(&inst, &s.lambda);
            if s.value == s.dual_objective(&f.target) && lib.as_ref() == Ok(&s.value) && own == s.value {
                duality_ok += 1;
            } else {
                first_error.get_or_insert(format!("case {case}: duality mismatch"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let c1 = line(
        agree == total && secs < 300.0,
        format!("{agree}/{total} verdicts agree ({certs} certificates, {witnesses} witnesses) in {secs:.1}s{}",
            first_error.as_ref().map(|e| format!("; first issue: {e}")).unwrap_or_default()),
    );
    let c2 = line(
        masters == total && duality_ok == masters,
        format!("{duality_ok}/{masters} master LPs with primal = dual = Lagrangian dual value"),
    );
    (c1, c2)
}

// ---------------------------------------------------------------- criterion 3

fn segment_param(a: &[Rat], b: &[Rat], x: &[Rat]) -> Option<Rat> {
    let k = (0..a.len()).find(|&k| a[k] != b[k])?;
    let t = (&x[k] - &a[k]) / (&b[k] - &a[k]);
    let on = (0..a.len()).all(|c| &a[c] + &t * (&b[c] - &a[c]) == x[c]);
    (on && t >= zero() && t <= int(1)).then_some(t)
}

fn brute_envelope(sense: Sense, pts: &[RatVec], costs: &[Rat], x: &[Rat]) -> Option<Rat> {
    let mut best: Option<Rat> = None;
    let mut offer = |v: Rat| {
        best = Some(match best.take() {
            Some(b) if !better(sense, &v, &b) => b,
            _ => v,
        })
    };
    let n = pts.len();
    for a in 0..n {
        if pts[a].as_slice() == x {
            offer(costs[a].clone());
        }
        for b in a + 1..n {
            if let Some(t) = segment_param(&pts[a], &pts[b], x) {
                offer((int(1) - &t) * &costs[a] + &t * &costs[b]);
            }
            if x.len() != 2 {
                continue;
            }
            for c in b + 1..n {
                let v1 = [&pts[b][0] - &pts[a][0], &pts[b][1] - &pts[a][1]];
                let v2 = [&pts[c][0] - &pts[a][0], &pts[c][1] - &pts[a][1]];
                let w = [&x[0] - &pts[a][0], &x[1] - &pts[a][1]];
                let det = &v1[0] * &v2[1] - &v1[1] * &v2[0];
                if det == zero() {
                    continue;
                }
                let s = (&w[0] * &v2[1] - &w[1] * &v2[0]) / &det;
                let t = (&v1[0] * &w[1] - &v1[1] * &w[0]) / &det;
                if s >= zero() && t >= zero() && &s + &t <= int(1) {
                    offer((int(1) - &s - &t) * &costs[a] + &s * &costs[b] + &t * &costs[c]);
                }
            }
        }
    }
    best
}

fn criterion_3() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sets = 120;
    let (mut queries, mut agree, mut inside) = (0, 0, 0);
    let mut first_error = None;
    for case in 0..sets {
        let d = if case % 2 == 0 { 1 } else { 2 };
        let (hi, count) = if d == 1 { (6, rng.gen_range(1..=5usize)) } else { (3, rng.gen_range(1..=6usize)) };
        let mut pts: Vec<RatVec> = Vec::new();
        while pts.len() < count {
            let p: RatVec = (0..d).map(|_| int(rng.gen_range(0..=hi))).collect();
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let costs: RatVec = pts.iter().map(|_| rand_rat(&mut rng, -4, 6)).collect();
        let sense = if rng.gen_bool(0.5) { Sense::Min } else { Sense::Max };
        let inst = Instance::new(
            sense,
            vec![StrategySpace::ConcaveHullPoints(pts.clone())],
            vec![CostModel::Tabulated(pts.iter().cloned().zip(costs.iter().cloned()).collect())],
            vec![zero(); d],
        )
        .expect("valid hull instance");
        let mut xs: Vec<RatVec> = (0..4)
            .map(|_| (0..d).map(|_| { let q = rng.gen_range(1..=4i64); frac(rng.gen_range(-q..=(hi + 1) * q), q) }).collect())
            .collect();
        let pick = |rng: &mut ChaCha8Rng| pts[rng.gen_range(0..pts.len())].clone();
        xs.push(pick(&mut rng));
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        xs.push((0..d).map(|k| (&a[k] + &b[k]) / int(2)).collect());
        xs.push((0..d).map(|k| (&a[k] + &b[k] + &c[k]) / int(3)).collect());
        for x in xs {
            queries += 1;
            let expect = brute_envelope(sense, &pts, &costs, &x);
            let got = envelope_value(&inst, 0, &x);
            let ok = match (&expect, &got) {
                (Some(e), Ok(g)) => e == g,
                (None, Err(Error::OutsideHull)) => true,
                _ => false,
            };
            inside += expect.is_some() as usize;
            if ok {
                agree += 1;
            } else {
                first_error.get_or_insert(format!("set {case}: brute {expect:?} vs {got:?}"));
            }
        }
    }
    line(
        agree == queries,
        format!("{agree}/{queries} envelope queries agree over {sets} point sets ({inside} inside the hull){}",
            first_error.map(|e| format!("; first issue: {e}")).unwrap_or_default()),
    )
}

// ---------------------------------------------------------------- criterion 4

/// `f(S) = Σ_t min(B_t, Σ_{j∈S} a_tj)`.
#[derive(Clone)]
struct Budget {
    m: usize,
    terms: Vec<(i64, Vec<i64>)>,
}

impl Budget {
    fn random(rng: &mut ChaCha8Rng, m: usize) -> Budget {
        let terms = (0..rng.gen_range(1..=2))
            .map(|_| (rng.gen_range(1..=2), (0..m).map(|_| rng.gen_range(0..=1)).collect()))
            .collect();
        Budget { m, terms }
    }

    fn f(&self, set: u32) -> i64 {
        self.terms
            .iter()
            .map(|(b, a)| (0..self.m).filter(|&j| set >> j & 1 == 1).map(|j| a[j]).sum::<i64>().min(*b))
            .sum()
    }
}

fn respects(f: &dyn Fn(u32) -> i64, m: usize, y: &[i64], base: bool) -> bool {
    y.iter().all(|&v| v >= 0)
        && (0..1u32 << m).all(|s| (0..m).filter(|&j| s >> j & 1 == 1).map(|j| y[j]).sum::<i64>() <= f(s))
        && (!base || y.iter().sum::<i64>() == f((1 << m) - 1))
}

/// Every integral vector of the polymatroid (or its bases).
fn polymatroid_points(f: &dyn Fn(u32) -> i64, m: usize, base: bool) -> Vec<RatVec> {
    let tops: Vec<usize> = (0..m).map(|j| f(1 << j) as usize + 1).collect();
    let mut out = Vec::new();
    each_profile(&tops, &mut |idx| {
        let y: Vec<i64> = idx.iter().map(|&v| v as i64).collect();
        if respects(f, m, &y, base) {
            out.push(y.iter().map(|&v| int(v)).collect());
        }
    });
    out
}

fn criterion_4() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let total = 200;
    let (mut integral, mut bases_ok, mut reverified) = (0, 0, 0);
    let mut first_error = None;
    for case in 0..total {
        let n = rng.gen_range(1..=3usize);
        let m = rng.gen_range(1..=(9 / n).min(4));
        let sense = if rng.gen_bool(0.5) { Sense::Min } else { Sense::Max };
        let base = sense == Sense::Min;
        let ranks: Vec<Budget> = (0..n).map(|_| Budget::random(&mut rng, m)).collect();
        let weights: Vec<RatVec> = (0..n)
            .map(|_| (0..m).map(|_| if base { rand_rat(&mut rng, -3, 9) } else { rand_rat(&mut rng, 0, 9) }).collect())
            .collect();
        let mut target = vec![0i64; m];
        for r in &ranks {
            let mut order: Vec<usize> = (0..m).collect();
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
            let mut prefix = 0u32;
            for j in order {
                let gain = r.f(prefix | 1 << j) - r.f(prefix);
                prefix |= 1 << j;
                target[j] += if base { gain } else { rng.gen_range(0..=gain) };
            }
        }
        let u: RatVec = target.iter().map(|&t| int(t)).collect();
        let inst = Instance::new(
            sense,
            ranks
                .iter()
                .map(|r| {
                    let o = RankOracle::from_fn(m, |s| r.f(s)).expect("budget-additive sums are submodular");
                    if base { StrategySpace::PolymatroidBase(o) } else { StrategySpace::PolymatroidVectors(o) }
                })
                .collect(),
            weights.iter().map(|w| CostModel::PerResourceLinear(w.iter().cloned().map(CoefficientFn::Const).collect())).collect(),
            u.clone(),
        )
        .expect("valid polymatroid game");
        let strategies: Vec<Vec<RatVec>> = ranks.iter().map(|r| polymatroid_points(&|s| r.f(s), m, base)).collect();
        let game = Game {
            sense,
            target: u.clone(),
            strategies: strategies.clone(),
            cost: Box::new(|i, _, y| dot(&weights[i], y)),
            aggregative: false,
        };

        let li = lift(&inst).expect("liftable");
        let mut p = li.reduced_lp();
        p.objective = li.weights.clone();
        let sol = lp::solve(&p).expect("LP solves");
        let mut brute: Option<Rat> = None;
        let sizes: Vec<usize> = strategies.iter().map(Vec::len).collect();
        each_profile(&sizes, &mut |idx| {
            let prof: Vec<&RatVec> = idx.iter().enumerate().map(|(i, &k)| &strategies[i][k]).collect();
            if sum_vecs(m, &prof).iter().zip(&u).any(|(l, t)| l > t) {
                return;
            }
            let v: Rat = prof.iter().enumerate().map(|(i, y)| dot(&weights[i], y)).sum();
            if brute.as_ref().is_none_or(|b| better(sense, &v, b)) {
                brute = Some(v);
            }
        });
        if sol.status == LpStatus::Optimal && sol.primal.iter().all(is_integer) && brute.as_ref() == Some(&sol.value) {
            integral += 1;
        } else {
            first_error.get_or_insert(format!("case {case}: LP {:?} value {} vs brute {brute:?}", sol.status, sol.value));
        }
        match enforce_polymatroid(&inst) {
            Ok(PolymatroidOutcome::Certificate { certificate: c, intersection, .. }) => {
                let fits = intersection.x.iter().zip(&ranks).all(|(y, r)| respects(&|s| r.f(s), m, y, base));
                let loads: Vec<i64> = (0..m).map(|j| intersection.x.iter().map(|y| y[j]).sum()).collect();
                if fits && loads.iter().zip(&target).all(|(l, t)| l <= t) {
                    bases_ok += 1;
                } else {
                    first_error.get_or_insert(format!("case {case}: decomposed vectors break a rank constraint"));
                }
                let lib = matches!(check_enforceable(&inst, &c.x_star, &c.prices, c.mode), Ok(Verdict::Certified(_)));
                match game.verify(&c.x_star, &c.prices, c.mode) {
                    Ok(()) if lib => reverified += 1,
                    r => {
                        first_error.get_or_insert(format!("case {case}: certificate does not re-verify: {r:?}"));
                    }
                }
            }
            other => {
                first_error.get_or_insert(format!("case {case}: {other:?}"));
            }
        }
    }
    line(
        integral == total && bases_ok == total && reverified == total,
        format!("{integral}/{total} integral LP optima, {bases_ok}/{total} valid decompositions, {reverified}/{total} certificates re-verify{}",
            first_error.map(|e| format!("; first issue: {e}")).unwrap_or_default()),
    )
}

// ---------------------------------------------------------------- criterion 5

fn congestion_cost(tables: &[Vec<RatVec>]) -> impl Fn(usize, &[Rat], &[Rat]) -> Rat + '_ {
    move |i, load, y| {
        let mut c = zero();
        for j in 0..y.len() {
            if y[j] != zero() {
                let k = pricing_core::rat::to_i64(&load[j]).expect("integral load") as usize;
                c += &tables[i][j][k] * &y[j];
            }
        }
        c
    }
}

fn criterion_5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let total = 220;
    let (mut certs, mut lifted, mut witnesses) = (0, 0, 0);
    let mut first_error = None;
    for case in 0..total {
        let n = rng.gen_range(1..=3usize);
        let m = rng.gen_range(1..=3usize);
        let subsets: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let mut s: Vec<u32> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..1u32 << m)).collect();
                s.sort();
                s.dedup();
                s
            })
            .collect();
        let table = |rng: &mut ChaCha8Rng| -> RatVec {
            let mut v = int(rng.gen_range(0..=2));
            (0..=n)
                .map(|_| {
                    let out = v.clone();
                    v += frac(rng.gen_range(0..=6), 2);
                    out
                })
                .collect()
        };
        let specific = rng.gen_bool(0.5);
        let tables: Vec<Vec<RatVec>> = if specific {
            (0..n).map(|_| (0..m).map(|_| table(&mut rng)).collect()).collect()
        } else {
            let t: Vec<RatVec> = (0..m).map(|_| table(&mut rng)).collect();
            vec![t; n]
        };
        let mut u = vec![zero(); m];
        for s in &subsets {
            let pick = s[rng.gen_range(0..s.len())];
            for j in 0..m {
                u[j] += int((pick >> j & 1) as i64);
            }
        }
        let spec = CongestionSpec {
            resources: m,
            players: subsets
                .iter()
                .map(|s| PlayerStrategies::Subsets(s.iter().map(|&mask| (0..m).filter(|j| mask >> j & 1 == 1).collect()).collect()))
                .collect(),
            costs: if specific { CostTables::PlayerSpecific(tables.clone()) } else { CostTables::Homogeneous(tables[0].clone()) },
            weights: None,
        };
        let (mag, assoc) = build_congestion(&spec, &u).expect("valid congestion game");
        let game = Game {
            sense: Sense::Min,
            target: u.clone(),
            strategies: subsets.iter().map(|s| s.iter().map(|&mask| mask_vec(mask, m)).collect()).collect(),
            cost: Box::new(congestion_cost(&tables)),
            aggregative: true,
        };
        match enforce(&assoc, Mode::Enforce) {
            Ok(Outcome::Certificate { certificate: c, .. }) => {
                certs += 1;
                match lift_certificate(&mag, &assoc, &c) {
                    Ok(l) if game.verify(&l.x_star, &l.prices, Mode::Enforce).is_ok() => lifted += 1,
                    r => {
                        first_error.get_or_insert(format!("case {case}: lift failed: {:?}", r.err()));
                    }
                }
            }
            Ok(Outcome::FractionalWitness(_)) => witnesses += 1,
            other => {
                first_error.get_or_insert(format!("case {case}: {other:?}"));
            }
        }
    }
    line(
        certs > 0 && lifted == certs && certs + witnesses == total,
        format!("{lifted}/{certs} associated-game certificates lift over {total} games ({witnesses} witnesses){}",
            first_error.map(|e| format!("; first issue: {e}")).unwrap_or_default()),
    )
}

// ---------------------------------------------------------------- file oracles

struct Emitted {
    file: InstanceFile,
    report: Report,
}

fn report_prices(r: &Report, m: usize) -> RatVec {
    (1..=m).map(|j| r.prices.get(&j).map_or_else(zero, |p| p.0.clone())).collect()
}

fn report_alloc(r: &Report) -> Vec<RatVec> {
    r.allocation.iter().map(|x| rats(x)).collect()
}

fn valuation(v: &ValuationFile, mask: u32) -> Rat {
    let has = |j: usize| mask >> j & 1 == 1;
    match v {
        ValuationFile::Additive(w) => (0..w.len()).filter(|&j| has(j)).map(|j| w[j].0.clone()).sum(),
        ValuationFile::UnitDemand(w) => (0..w.len()).filter(|&j| has(j)).map(|j| w[j].0.clone()).max().unwrap_or_else(zero),
        ValuationFile::SingleMinded { bundle, value } => {
            if bundle.iter().all(|&j| has(j)) {
                value.0.clone()
            } else {
                zero()
            }
        }
        ValuationFile::Table(t) => t[mask as usize].0.clone(),
    }
}

/// Trade points of player `i`: `-1` on sales, `+1` on purchases.
fn trade_points(t: &TradingFile, i: usize) -> Vec<(RatVec, Rat)> {
    let inc: Vec<usize> = (0..t.edges.len()).filter(|&e| t.edges[e].0 == i || t.edges[e].1 == i).collect();
    (0..1usize << inc.len())
        .map(|s| {
            let mut x = vec![zero(); t.edges.len()];
            for (k, &e) in inc.iter().enumerate() {
                if s >> k & 1 == 1 {
                    x[e] = int(if t.edges[e].0 == i { -1 } else { 1 });
                }
            }
            (x, t.valuations[i][s].0.clone())
        })
        .collect()
}

fn rank_fn(r: &RankFile) -> impl Fn(u32) -> i64 + '_ {
    move |s| r.table[s as usize]
}

/// Independent game for a report's domain, or `None` when no oracle exists.
fn oracle_game<'a>(file: &'a InstanceFile, report: &Report) -> Option<Game<'a>> {
    let listed = |sense: Sense, target: RatVec, lists: Vec<Vec<(RatVec, Rat)>>| -> Game<'a> {
        let strategies = lists.iter().map(|l| l.iter().map(|(x, _)| x.clone()).collect()).collect();
        Game {
            sense,
            target,
            strategies,
            cost: Box::new(move |i, _, y| lists[i].iter().find(|(x, _)| x.as_slice() == y).expect("listed").1.clone()),
            aggregative: false,
        }
    };
    let target = || rats(file.target.as_ref().expect("target present"));
    match &file.body {
        Body::Generic(g) => {
            let lists = g
                .players
                .iter()
                .map(|p| match (&p.space, &p.cost, &p.consumption) {
                    (SpaceFile::Finite(pts), CostFile::Tabulated(c), None) => {
                        Some(pts.iter().map(|x| rats(x)).zip(c.iter().map(|v| v.0.clone())).collect())
                    }
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()?;
            Some(listed(g.sense.into(), target(), lists))
        }
        Body::Polymatroid(p) => {
            let sense: Sense = p.sense.into();
            let lists = p
                .players
                .iter()
                .map(|pl| {
                    polymatroid_points(&rank_fn(&pl.rank), pl.rank.m, sense == Sense::Min)
                        .into_iter()
                        .map(|y| {
                            let v = dot(&rats(&pl.weights), &y);
                            (y, v)
                        })
                        .collect()
                })
                .collect();
            Some(listed(sense, target(), lists))
        }
        Body::Congestion(c) => {
            if c.weights.is_some() {
                return None;
            }
            let m = c.resources;
            let n = c.players.len();
            let strategies = c
                .players
                .iter()
                .map(|p| match p {
                    CongestionPlayerFile::Subsets(s) => {
                        Some(s.iter().map(|set| mask_vec(set.iter().map(|&j| 1u32 << j).sum(), m)).collect())
                    }
                    CongestionPlayerFile::Matroid(r) => Some(polymatroid_points(&rank_fn(r), m, true)),
                    CongestionPlayerFile::Network { .. } => None,
                })
                .collect::<Option<Vec<_>>>()?;
            let tables: Vec<Vec<RatVec>> = match &c.costs {
                CostTablesFile::Homogeneous(t) => vec![t.iter().map(|v| rats(v)).collect(); n],
                CostTablesFile::PlayerSpecific(t) => t.iter().map(|p| p.iter().map(|v| rats(v)).collect()).collect(),
            };
            Some(Game {
                sense: Sense::Min,
                target: target(),
                strategies,
                cost: Box::new(move |i, load, y| congestion_cost(&tables)(i, load, y)),
                aggregative: report.game.as_deref() == Some("aggregative"),
            })
        }
        Body::Walrasian(w) if w.externalities.is_none() => {
            let m = w.multiplicities.len();
            let lists = w
                .buyers
                .iter()
                .map(|v| (0..1u32 << m).map(|s| (mask_vec(s, m), valuation(v, s))).collect())
                .collect();
            Some(listed(Sense::Max, w.multiplicities.iter().map(|&k| int(k)).collect(), lists))
        }
        Body::Trading(t) => {
            let lists = (0..t.players).map(|i| trade_points(t, i)).collect();
            Some(listed(Sense::Max, vec![zero(); t.edges.len()], lists))
        }
        _ => None,
    }
}

fn oracle_verdict(e: &Emitted, report: &Report) -> Option<Result<(), String>> {
    let game = oracle_game(&e.file, report)?;
    let mode = Mode::from(report.mode?);
    Some(game.verify(&report_alloc(report), &report_prices(report, game.target.len()), mode))
}

fn run(file: InstanceFile) -> (i32, Emitted) {
    let (code, report) = enforce_file(&file, &Options::default()).expect("generated files solve");
    (code, Emitted { file, report })
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6(corpus: &mut Vec<Emitted>) -> Line {
    let mut counts = Vec::new();
    let mut first_error = None;
    for fam in ["walrasian-additive", "walrasian-unitdemand"] {
        let mut ok = 0;
        for seed in 0..100 {
            let (code, e) = run(generate(fam, seed, &Size::default()).unwrap());
            let eq = e.report.interpretation.as_ref().is_some_and(|v| v["equilibrium"] == true);
            match oracle_verdict(&e, &e.report) {
                Some(Ok(())) if code == EXIT_CERTIFICATE && eq => ok += 1,
                r => {
                    first_error.get_or_insert(format!("{fam} seed {seed}: exit {code}, oracle {r:?}"));
                }
            }
            if code == EXIT_CERTIFICATE {
                corpus.push(e);
            }
        }
        counts.push(ok);
    }
    let (code, e) = run(generate("walrasian-singleminded", 0, &Size::default()).unwrap());
    let w = e.report.witness.as_ref();
    let gadget = code == EXIT_WITNESS
        && e.report.master_value == Some(R(frac(7, 2)))
        && w.and_then(|w| w.best_integral_value.clone()) == Some(R(int(3)));
    line(
        counts == [100, 100] && gadget,
        format!("additive {}/100, unit-demand {}/100 equilibria; single-minded gadget {} (value {}, best integral {}){}",
            counts[0], counts[1],
            if gadget { "witness" } else { "unexpected" },
            e.report.master_value.as_ref().map_or("-".into(), |v| v.0.to_string()),
            w.and_then(|w| w.best_integral_value.as_ref()).map_or("-".into(), |v| v.0.to_string()),
            first_error.map(|e| format!("; first issue: {e}")).unwrap_or_default()),
    )
}

// ---------------------------------------------------------------- criterion 7

fn endpoint_consistent(t: &TradingFile, r: &Report) -> bool {
    let x = report_alloc(r);
    let p = report_prices(r, t.edges.len());
    let weak = r.mode == Some(ModeTag::WeakMarket);
    let realized: Vec<usize> = r
        .interpretation
        .as_ref()
        .and_then(|v| serde_json::from_value(v["realized_trades"].clone()).ok())
        .unwrap_or_default();
    t.edges.iter().enumerate().all(|(e, &(s, b))| {
        let sold = x[s][e] == int(-1);
        let bought = x[b][e] == int(1);
        let consistent = sold == bought || (weak && sold && p[e] == zero());
        consistent && realized.contains(&e) == (sold && bought)
    })
}

fn criterion_7(corpus: &mut Vec<Emitted>) -> Line {
    let mut first_error = None;
    let (mut single, mut chain) = (0, 0);
    for seed in 0..100 {
        for n in [2, 3 + seed as usize % 3] {
            let size = Size { n: Some(n), ..Size::default() };
            let (code, e) = run(generate("trading-chain", seed, &size).unwrap());
            let Body::Trading(t) = &e.file.body else { unreachable!() };
            let ok = code == EXIT_CERTIFICATE
                && endpoint_consistent(t, &e.report)
                && matches!(oracle_verdict(&e, &e.report), Some(Ok(())));
            if ok {
                if n == 2 {
                    single += 1;
                } else {
                    chain += 1;
                }
            } else {
                first_error.get_or_insert(format!("n {n} seed {seed}: exit {code}"));
            }
            if code == EXIT_CERTIFICATE {
                corpus.push(e);
            }
        }
    }
    line(
        single == 100 && chain == 100,
        format!("single-edge {single}/100, chain {chain}/100 consistent certificates{}",
            first_error.map(|e| format!("; first issue: {e}")).unwrap_or_default()),
    )
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8(corpus: &mut Vec<Emitted>) -> Line {
    let mut ok = 0;
    for seed in 0..100 {
        let (code, e) = run(generate("kelly-dag", seed, &Size::default()).unwrap());
        if code == EXIT_CERTIFICATE {
            ok += 1;
            corpus.push(e);
        }
    }
    let (integral, _) = run(kelly_gadget());
    let mut frac_file = kelly_gadget();
    if let Body::Kelly(k) = &mut frac_file.body {
        k.integral = false;
    }
    let (fractional, e) = run(frac_file);
    let weak = e.report.mode == Some(ModeTag::WeakMarket);
    if fractional == EXIT_CERTIFICATE {
        corpus.push(e);
    }
    line(
        ok == 100 && integral == EXIT_WITNESS && fractional == EXIT_CERTIFICATE && weak,
        format!("kelly-dag {ok}/100 certificates; gadget exit {integral} integral, exit {fractional} fractional ({})",
            if weak { "weak-market" } else { "not weak-market" }),
    )
}

// ---------------------------------------------------------------- criterion 9

fn criterion_9(mut corpus: Vec<Emitted>) -> Line {
    for fam in ["random-finite", "congestion-parallel", "congestion-matroid", "polymatroid-uniform"] {
        for seed in 0..40 {
            let (code, e) = run(generate(fam, seed, &Size::default()).unwrap());
            if code == EXIT_CERTIFICATE {
                corpus.push(e);
            }
        }
    }
    let mut first_error = None;
    let verified = corpus
        .iter()
        .filter(|e| matches!(check_report(&e.file, &e.report, DEFAULT_CAP), Ok(CheckResult::Verified)))
        .count();
    let oracle_ok = corpus.iter().all(|e| !matches!(oracle_verdict(e, &e.report), Some(Err(_))));
    let pool: Vec<&Emitted> = corpus.iter().filter(|e| oracle_game(&e.file, &e.report).is_some()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let total = 1000;
    let (mut rejected, mut legit, mut silent, mut false_reject, mut no_witness) = (0, 0, 0, 0, 0);
    for k in 0..total {
        let e = pool[rng.gen_range(0..pool.len())];
        let mut r = e.report.clone();
        let alloc_coords: Vec<(usize, usize)> =
            r.allocation.iter().enumerate().flat_map(|(i, x)| (0..x.len()).map(move |c| (i, c))).collect();
        if rng.gen_bool(0.5) || alloc_coords.is_empty() {
            let keys: Vec<usize> = r.prices.keys().copied().collect();
            let j = keys[rng.gen_range(0..keys.len())];
            let d = if rng.gen_bool(0.5) { 1 } else { -1 };
            let p = r.prices.get_mut(&j).unwrap();
            p.0 += int(d);
        } else {
            let (i, c) = alloc_coords[rng.gen_range(0..alloc_coords.len())];
            let v = &mut r.allocation[i][c];
            v.0 = if v.0 == zero() { int(1) } else { zero() };
        }
        let truth = oracle_verdict(e, &r).expect("pool has oracles");
        match (check_report(&e.file, &r, DEFAULT_CAP), truth) {
            (Ok(CheckResult::Violation(msg)), Err(_)) if !msg.is_empty() => rejected += 1,
            (Ok(CheckResult::Verified), Ok(())) => legit += 1,
            (Ok(CheckResult::Verified), Err(why)) => {
                silent += 1;
                first_error.get_or_insert(format!("mutation {k} ({}) accepted but {why}", e.report.domain));
            }
            (Ok(CheckResult::Violation(msg)), Ok(())) => {
                false_reject += 1;
                first_error.get_or_insert(format!("mutation {k} ({}) rejected but valid: {msg}", e.report.domain));
            }
            (other, _) => {
                no_witness += 1;
                first_error.get_or_insert(format!("mutation {k} ({}): {other:?}", e.report.domain));
            }
        }
    }
    line(
        verified == corpus.len() && oracle_ok && silent == 0 && false_reject == 0 && no_witness == 0,
        format!("{verified}/{} emitted certificates verify; {total} mutations over {} certificates: {rejected} rejected with a witness, {legit} still valid, {silent} silent acceptances, {false_reject} false rejections, {no_witness} without a witness{}",
            corpus.len(), pool.len(),
            first_error.map(|e| format!("; first issue: {e}")).unwrap_or_default()),
    )
}

fn main() -> ExitCode {
    let mut corpus = Vec::new();
    let (c1, c2) = criteria_1_2();
    let lines = [
        c1,
        c2,
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(&mut corpus),
        criterion_7(&mut corpus),
        criterion_8(&mut corpus),
    ];
    let c9 = criterion_9(corpus);
    let mut failed = 0;
    for (k, l) in lines.iter().chain(std::iter::once(&c9)).enumerate() {
        println!("criterion {}: {} - {}", k + 1, if l.pass { "PASS" } else { "FAIL" }, l.detail);
        failed += !l.pass as usize;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
