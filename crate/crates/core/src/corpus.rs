//! Reference instances and seeded random instance generators.
//!
//! Random AEP instances are built by lifting a quotient graph: cells of one
//! to four nodes, and every pair of linked cells is joined either by a
//! complete bipartite graph of uniform weight or, for equal-size cells, a
//! perfect matching. Both give every node the same weight into the other
//! cell. Edges inside a cell are arbitrary.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{is_almost_equitable, Laplacian, Partition, WeightedGraph};
use crate::linalg::{is_hurwitz, Mat, HURWITZ_MARGIN};
use crate::netsys::{AgentDynamics, NetworkSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsKind {
    SingleIntegrator,
    /// `A = −GGᵀ`, `B = HHᵀ + δI`.
    Symmetric,
    /// Symmetric negative definite `A` plus a nonsymmetric perturbation.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeaderPlacement {
    Random,
    /// Every leader is the only node of its cell.
    Alone,
    /// At least two leaders share a cell.
    SharedCell,
    /// Leaders in pairwise distinct cells.
    DistinctCells,
}

#[derive(Debug, Clone)]
pub struct CorpusOptions {
    pub max_nodes: usize,
    pub max_agent_dim: usize,
    pub max_inputs: usize,
    pub max_leaders: usize,
    pub dynamics: DynamicsKind,
    pub leaders: LeaderPlacement,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self {
            max_nodes: 30,
            max_agent_dim: 3,
            max_inputs: 2,
            max_leaders: 4,
            dynamics: DynamicsKind::SingleIntegrator,
            leaders: LeaderPlacement::Random,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: WeightedGraph,
    pub network: NetworkSystem,
    pub partition: Partition,
}

fn weight<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(0.5..2.0)
}

fn random_mat<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random agent dynamics of `kind` that synchronize on `laplacian`.
pub fn random_dynamics<R: Rng>(rng: &mut R, kind: DynamicsKind, laplacian: &Laplacian, opts: &CorpusOptions) -> AgentDynamics {
    if kind == DynamicsKind::SingleIntegrator {
        return AgentDynamics::single_integrator();
    }
    let n = rng.gen_range(1..=opts.max_agent_dim.max(1));
    let r = rng.gen_range(1..=opts.max_inputs.max(1));
    let lambdas = laplacian.nonzero_eigenvalues();
    let mut scale = 0.5;
    loop {
        let g = random_mat(rng, n, n);
        let h = random_mat(rng, n, n);
        let b = &h * h.transpose() + Mat::identity(n, n) * 0.2;
        let e = random_mat(rng, n, r);
        let a = match kind {
            DynamicsKind::Symmetric => -(&g * g.transpose()),
            _ => -(&g * g.transpose()) - Mat::identity(n, n) * 0.2 + random_mat(rng, n, n) * scale,
        };
        let d = AgentDynamics::new(a, b, e).expect("shapes agree");
        if lambdas.iter().all(|&l| is_hurwitz(&d.coupled(l), HURWITZ_MARGIN)) {
            return d;
        }
        scale *= 0.7;
    }
}

fn pick_leaders<R: Rng>(rng: &mut R, cells: &[Vec<usize>], placement: LeaderPlacement, max_leaders: usize) -> Vec<usize> {
    let n: usize = cells.iter().map(Vec::len).sum();
    match placement {
        LeaderPlacement::Random => {
            let m = rng.gen_range(0..=max_leaders.min(n));
            let mut nodes: Vec<usize> = (0..n).collect();
            nodes.shuffle(rng);
            nodes.truncate(m);
            nodes
        }
        LeaderPlacement::Alone => {
            let mut singles: Vec<usize> = cells.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
            singles.shuffle(rng);
            let m = rng.gen_range(1..=max_leaders.min(singles.len()).max(1));
            singles.truncate(m);
            singles
        }
        LeaderPlacement::SharedCell => {
            let big: Vec<&Vec<usize>> = cells.iter().filter(|c| c.len() >= 2).collect();
            let cell = big[rng.gen_range(0..big.len())];
            let mut pair = cell.clone();
            pair.shuffle(rng);
            let mut leaders: Vec<usize> = pair[..2].to_vec();
            let extra = rng.gen_range(0..=max_leaders.saturating_sub(2));
            let mut rest: Vec<usize> = (0..n).filter(|v| !leaders.contains(v)).collect();
            rest.shuffle(rng);
            leaders.extend(rest.into_iter().take(extra));
            leaders.shuffle(rng);
            leaders
        }
        LeaderPlacement::DistinctCells => {
            let mut order: Vec<&Vec<usize>> = cells.iter().collect();
            order.shuffle(rng);
            let m = rng.gen_range(1..=max_leaders.min(order.len()).max(1));
            order.into_iter().take(m).map(|c| c[rng.gen_range(0..c.len())]).collect()
        }
    }
}

/// Random connected graph with an almost equitable partition of cells of
/// size 1–4, obtained by lifting a random quotient graph.
#[allow(clippy::needless_range_loop)]
pub fn random_aep_instance<R: Rng>(rng: &mut R, opts: &CorpusOptions) -> Instance {
    loop {
        let max_nodes = opts.max_nodes.max(2);
        let mut sizes: Vec<usize> = Vec::new();
        let target_cells = rng.gen_range(2..=8);
        while sizes.len() < target_cells {
            let s = rng.gen_range(1..=4);
            if sizes.iter().sum::<usize>() + s > max_nodes {
                break;
            }
            sizes.push(s);
        }
        if sizes.len() < 2 {
            continue;
        }
        match opts.leaders {
            LeaderPlacement::Alone => {
                let singles = rng.gen_range(1..=opts.max_leaders.clamp(1, sizes.len()));
                sizes.iter_mut().take(singles).for_each(|s| *s = 1);
            }
            LeaderPlacement::SharedCell => {
                if sizes[0] < 2 {
                    sizes[0] = 2;
                }
                if sizes.iter().sum::<usize>() > max_nodes {
                    continue;
                }
            }
            _ => {}
        }
        let n: usize = sizes.iter().sum();

        let mut labels: Vec<usize> = (0..n).collect();
        labels.shuffle(rng);
        let mut cells = Vec::new();
        let mut offset = 0;
        for &s in &sizes {
            cells.push(labels[offset..offset + s].to_vec());
            offset += s;
        }

        let k = cells.len();
        let mut linked = vec![vec![false; k]; k];
        for p in 1..k {
            let q = rng.gen_range(0..p);
            linked[p][q] = true;
        }
        for p in 0..k {
            for q in 0..p {
                if rng.gen_bool(0.3) {
                    linked[p][q] = true;
                }
            }
        }

        let mut edges = Vec::new();
        for p in 0..k {
            for q in 0..p {
                if !linked[p][q] {
                    continue;
                }
                let w = weight(rng);
                let (cp, cq) = (&cells[p], &cells[q]);
                if cp.len() == cq.len() && rng.gen_bool(0.5) {
                    let mut perm = cq.clone();
                    perm.shuffle(rng);
                    edges.extend(cp.iter().zip(&perm).map(|(&i, &j)| (i, j, w)));
                } else {
                    edges.extend(cp.iter().flat_map(|&i| cq.iter().map(move |&j| (i, j, w))));
                }
            }
            for a in 0..cells[p].len() {
                for b in 0..a {
                    if rng.gen_bool(0.5) {
                        edges.push((cells[p][a], cells[p][b], weight(rng)));
                    }
                }
            }
        }

        let graph = WeightedGraph::new(n, edges).expect("lifted graph is valid");
        let laplacian = Laplacian::from_graph(&graph).expect("weights are positive");
        if !laplacian.is_connected() {
            continue;
        }
        let partition = Partition::new(n, cells.clone()).expect("cells cover all nodes");
        debug_assert!(is_almost_equitable(&laplacian, &partition));
        let leaders = pick_leaders(rng, &cells, opts.leaders, opts.max_leaders);
        let dynamics = random_dynamics(rng, opts.dynamics, &laplacian, opts);
        let network = NetworkSystem::new(laplacian, leaders, dynamics).expect("leaders are valid");
        return Instance { graph, network, partition };
    }
}

/// Random connected graph (spanning tree plus random extra edges) with a
/// random partition that is not almost equitable.
pub fn random_general_instance<R: Rng>(rng: &mut R, opts: &CorpusOptions) -> Instance {
    loop {
        let n = rng.gen_range(3..=opts.max_nodes.max(3));
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut edges = Vec::new();
        let mut present = std::collections::HashSet::new();
        for i in 1..n {
            let j = order[rng.gen_range(0..i)];
            let (a, b) = (order[i].min(j), order[i].max(j));
            present.insert((a, b));
            edges.push((a, b, weight(rng)));
        }
        let density = rng.gen_range(0.05..0.4);
        for a in 0..n {
            for b in (a + 1)..n {
                if !present.contains(&(a, b)) && rng.gen_bool(density) {
                    edges.push((a, b, weight(rng)));
                }
            }
        }
        let graph = WeightedGraph::new(n, edges).expect("generated graph is valid");
        let laplacian = Laplacian::from_graph(&graph).expect("weights are positive");

        let k = rng.gen_range(2..n);
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(rng);
        let mut labels = vec![0; n];
        for (idx, &v) in nodes.iter().enumerate() {
            labels[v] = if idx < k { idx } else { rng.gen_range(0..k) };
        }
        let mut cells = vec![Vec::new(); k];
        for (v, &p) in labels.iter().enumerate() {
            cells[p].push(v);
        }
        let partition = Partition::new(n, cells.clone()).expect("every label is used");
        if is_almost_equitable(&laplacian, &partition) {
            continue;
        }
        let placement = match opts.leaders {
            LeaderPlacement::SharedCell if cells.iter().all(|c| c.len() < 2) => LeaderPlacement::Random,
            LeaderPlacement::Alone if cells.iter().all(|c| c.len() != 1) => LeaderPlacement::Random,
            other => other,
        };
        let leaders = pick_leaders(rng, &cells, placement, opts.max_leaders);
        let dynamics = random_dynamics(rng, opts.dynamics, &laplacian, opts);
        let network = NetworkSystem::new(laplacian, leaders, dynamics).expect("leaders are valid");
        return Instance { graph, network, partition };
    }
}

/// Unit-weight path on five nodes, cells `{1,2,3}`, `{4,5}`, leader 1.
pub fn path5_two_cells() -> Instance {
    let graph = WeightedGraph::path(5, 1.0);
    let laplacian = Laplacian::from_graph(&graph).expect("path is valid");
    let network = NetworkSystem::new(laplacian, vec![0], AgentDynamics::single_integrator()).expect("leader is valid");
    let partition = Partition::new(5, vec![vec![0, 1, 2], vec![3, 4]]).expect("cells are valid");
    Instance { graph, network, partition }
}

/// Unit-weight triangle, cells `{1}`, `{2,3}`, leader 1.
pub fn k3_aep() -> Instance {
    let graph = WeightedGraph::complete(3, 1.0);
    let laplacian = Laplacian::from_graph(&graph).expect("triangle is valid");
    let network = NetworkSystem::new(laplacian, vec![0], AgentDynamics::single_integrator()).expect("leader is valid");
    let partition = Partition::new(3, vec![vec![0], vec![1, 2]]).expect("cells are valid");
    Instance { graph, network, partition }
}

pub const EXAMPLE_NAMES: [&str; 4] = ["paper-section7", "k3-aep", "random-aep", "random-general"];

/// Named example; the random ones are single-integrator networks seeded by `seed`.
pub fn example(name: &str, seed: u64) -> Result<Instance> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let opts = CorpusOptions { max_nodes: 12, ..CorpusOptions::default() };
    match name {
        "paper-section7" => Ok(path5_two_cells()),
        "k3-aep" => Ok(k3_aep()),
        "random-aep" => Ok(random_aep_instance(&mut rng, &opts)),
        "random-general" => Ok(random_general_instance(&mut rng, &opts)),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::leaders_share_cell;
    use crate::netsys::is_synchronized;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lifted_instances_are_aep_and_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let inst = random_aep_instance(&mut rng, &CorpusOptions::default());
            assert!(inst.network.laplacian().is_connected());
            assert!(is_almost_equitable(inst.network.laplacian(), &inst.partition));
            assert!(inst.network.n_nodes() <= 30);
            assert!(inst.partition.cells().iter().all(|c| (1..=4).contains(&c.len())));
        }
    }

    #[test]
    fn general_instances_are_not_aep() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let inst = random_general_instance(&mut rng, &CorpusOptions::default());
            assert!(inst.network.laplacian().is_connected());
            assert!(!is_almost_equitable(inst.network.laplacian(), &inst.partition));
        }
    }

    #[test]
    fn leader_placements_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for placement in [LeaderPlacement::Alone, LeaderPlacement::SharedCell, LeaderPlacement::DistinctCells] {
            let opts = CorpusOptions { leaders: placement, ..CorpusOptions::default() };
            for _ in 0..20 {
                let inst = random_aep_instance(&mut rng, &opts);
                let (ns, pi) = (&inst.network, &inst.partition);
                assert!(ns.n_leaders() >= 1);
                match placement {
                    LeaderPlacement::Alone => assert!(ns.leaders().iter().all(|&v| pi.cell_size(pi.cell_of(v)) == 1)),
                    LeaderPlacement::SharedCell => assert!(leaders_share_cell(ns, pi)),
                    _ => assert!(!leaders_share_cell(ns, pi)),
                }
            }
        }
    }

    #[test]
    fn random_dynamics_synchronize() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in [DynamicsKind::Symmetric, DynamicsKind::General] {
            let opts = CorpusOptions { dynamics: kind, ..CorpusOptions::default() };
            for _ in 0..20 {
                let inst = random_aep_instance(&mut rng, &opts);
                assert!(is_synchronized(&inst.network));
                let d = inst.network.dynamics();
                if kind == DynamicsKind::Symmetric || d.n() == 1 {
                    assert!(d.is_symmetric());
                } else {
                    assert!(!d.is_symmetric());
                }
            }
        }
    }

    #[test]
    fn named_examples() {
        assert_eq!(example("k3-aep", 0).unwrap().network.n_nodes(), 3);
        assert_eq!(example("paper-section7", 0).unwrap().partition.num_cells(), 2);
        let a = example("random-aep", 42).unwrap();
        let b = example("random-aep", 42).unwrap();
        assert_eq!(a.graph, b.graph);
        assert!(is_almost_equitable(a.network.laplacian(), &a.partition));
        assert!(matches!(example("nope", 0), Err(Error::UnknownName(_))));
    }
}
