#![allow(dead_code)]

use expansive::mapping::Mapping;
use expansive::space::{FiniteSpace, Label, PartialOrder, Point, Relation, Space};
use rand::seq::SliceRandom;
use rand::Rng;

/// A finite problem: a space, one or two self-maps, an order and a start
/// point.
pub struct Instance {
    pub space: Space,
    pub u: Mapping,
    pub v: Option<Mapping>,
    pub order: PartialOrder,
    pub x0: Point,
    pub eta: f64,
}

/// Points on a line at distinct integer coordinates.
pub fn line_space<R: Rng>(rng: &mut R, n: usize) -> Space {
    let mut coords: Vec<i32> = (0..100).collect();
    coords.shuffle(rng);
    let values: Vec<f64> = coords[..n].iter().map(|&c| c as f64).collect();
    Space::Finite(FiniteSpace::on_line(&values).unwrap())
}

/// Shortest-path metric of a complete graph with integer weights.
#[allow(clippy::needless_range_loop)]
pub fn graph_space<R: Rng>(rng: &mut R, n: usize) -> Space {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..20) as f64;
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let labels = (0..n).map(|i| Label::Name(format!("p{i}"))).collect();
    Space::Finite(FiniteSpace::new(labels, d).unwrap())
}

/// A random partial order: a random linear ranking thinned with
/// probability `keep`, then closed transitively.
pub fn random_order<R: Rng>(rng: &mut R, n: usize, keep: f64) -> PartialOrder {
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    let mut rel = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            rel[i][j] = i == j || (rank[i] < rank[j] && rng.gen_bool(keep));
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if rel[i][k] && rel[k][j] {
                    rel[i][j] = true;
                }
            }
        }
    }
    let mut pairs = Vec::new();
    for (i, row) in rel.iter().enumerate() {
        for (j, &le) in row.iter().enumerate() {
            if le {
                pairs.push((Point::Finite(i), Point::Finite(j)));
            }
        }
    }
    PartialOrder {
        relation: Relation::Table(pairs.into_iter().collect()),
        regular: true,
    }
}

/// A total order given by a random ranking.
pub fn total_order<R: Rng>(rng: &mut R, n: usize) -> PartialOrder {
    random_order(rng, n, 1.0)
}

pub fn random_map<R: Rng>(rng: &mut R, n: usize) -> Mapping {
    Mapping::table("U", (0..n).map(|_| rng.gen_range(0..n)).collect())
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Mapping {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    Mapping::table("U", images)
}

/// A chain `c_0, ..., c_k` at positions `s^{-i}` on a line, with `U` the
/// identity and `V c_i = c_{i+1}`, `V c_k = c_k`. `V` contracts every pair
/// by at least `1/s`, so the Jungck condition holds for `e^t` and every
/// `eta < s`, and the two-map iteration walks down the chain to `c_k`.
pub fn chain_instance<R: Rng>(rng: &mut R, max_points: usize) -> Instance {
    let k = rng.gen_range(2..max_points);
    let s: f64 = rng.gen_range(1.5..3.0);
    let n = k + 1;
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(rng);
    // slots[i] is the insertion index of c_i
    let mut values = vec![0.0; n];
    for (i, &slot) in slots.iter().enumerate() {
        values[slot] = s.powi(-(i as i32));
    }
    let space = Space::Finite(FiniteSpace::on_line(&values).unwrap());
    let mut images = vec![0; n];
    for i in 0..k {
        images[slots[i]] = slots[i + 1];
    }
    images[slots[k]] = slots[k];
    let pairs = (0..n).flat_map(|i| (i..n).map(move |j| (i, j)));
    let pairs: Vec<(Point, Point)> = pairs
        .map(|(i, j)| (Point::Finite(slots[j]), Point::Finite(slots[i])))
        .collect();
    Instance {
        u: Mapping::identity(&space).unwrap(),
        v: Some(Mapping::table("V", images)),
        order: PartialOrder::table(&space, pairs, true),
        x0: Point::Finite(slots[rng.gen_range(0..k)]),
        eta: rng.gen_range(1.05..s - 0.01),
        space,
    }
}

/// An unstructured instance: random metric, map, order and start.
pub fn random_instance<R: Rng>(rng: &mut R, max_points: usize) -> Instance {
    let n = rng.gen_range(2..=max_points);
    let space = if rng.gen_bool(0.5) {
        line_space(rng, n)
    } else {
        graph_space(rng, n)
    };
    let u = if rng.gen_bool(0.5) {
        random_permutation(rng, n)
    } else {
        random_map(rng, n)
    };
    let keep = rng.gen_range(0.0..1.0);
    let v = rng.gen_bool(0.5).then(|| random_map(rng, n));
    Instance {
        v,
        order: random_order(rng, n, keep),
        x0: Point::Finite(rng.gen_range(0..n)),
        eta: rng.gen_range(1.01..4.0),
        space,
        u,
    }
}

/// Brute-force fixed points straight from the map table.
pub fn table_fixed_points(u: &Mapping, n: usize) -> Vec<Point> {
    (0..n)
        .map(Point::Finite)
        .filter(|p| u.apply(p) == *p)
        .collect()
}
