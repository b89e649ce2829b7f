//! CVRP instances, Euclidean costs, deterministic generation and the
//! line-oriented instance file format.
//!
//! Customers are numbered `1..=n`. Index `0` stands for the depot, which
//! plays both the source (−1) and sink (−2) roles; they share a location.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::custset::MAX_CUSTOMERS;
use crate::error::{Error, Result};

/// Index of the depot in coordinate and cost arrays.
pub const DEPOT: usize = 0;

/// Side length of the square the generator samples from.
pub const GRID_SIZE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandMode {
    /// Every customer has demand 1.
    Unit,
    /// Demands drawn uniformly from `1..=10`.
    Uniform1To10,
}

impl DemandMode {
    pub fn max_demand(self) -> u32 {
        match self {
            DemandMode::Unit => 1,
            DemandMode::Uniform1To10 => 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    /// `coords[0]` is the depot.
    coords: Vec<(f64, f64)>,
    /// `demand[0]` is always 0.
    demand: Vec<u32>,
    capacity: u32,
    fleet: u32,
}

impl Instance {
    /// Builds an instance from the depot location and customers `1..=n`
    /// given in id order as `(x, y, demand)`.
    pub fn new(
        name: impl Into<String>,
        depot: (f64, f64),
        customers: &[(f64, f64, u32)],
        capacity: u32,
        fleet: u32,
    ) -> Result<Self> {
        let n = customers.len();
        if n == 0 {
            return Err(Error::Validation("instance needs at least one customer".into()));
        }
        if n > MAX_CUSTOMERS {
            return Err(Error::Validation(format!(
                "at most {MAX_CUSTOMERS} customers supported, got {n}"
            )));
        }
        if capacity == 0 {
            return Err(Error::Validation("capacity must be positive".into()));
        }
        if fleet == 0 {
            return Err(Error::Validation("fleet must be positive".into()));
        }
        if !(depot.0.is_finite() && depot.1.is_finite()) {
            return Err(Error::Validation("depot coordinates must be finite".into()));
        }
        let mut coords = Vec::with_capacity(n + 1);
        let mut demand = Vec::with_capacity(n + 1);
        coords.push(depot);
        demand.push(0);
        for (i, &(x, y, d)) in customers.iter().enumerate() {
            let id = i + 1;
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::Validation(format!("customer {id}: non-finite coordinates")));
            }
            if d == 0 {
                return Err(Error::Validation(format!("customer {id}: demand must be at least 1")));
            }
            if d > capacity {
                return Err(Error::Validation(format!(
                    "customer {id}: demand {d} exceeds capacity {capacity}"
                )));
            }
            coords.push((x, y));
            demand.push(d);
        }
        Ok(Instance {
            name: name.into(),
            coords,
            demand,
            capacity,
            fleet,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of customers.
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn customers(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n()
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn fleet(&self) -> u32 {
        self.fleet
    }

    pub fn with_fleet(mut self, fleet: u32) -> Result<Self> {
        if fleet == 0 {
            return Err(Error::Validation("fleet must be positive".into()));
        }
        self.fleet = fleet;
        Ok(self)
    }

    /// Demand of a customer, 0 for the depot.
    pub fn demand(&self, u: usize) -> u32 {
        self.demand[u]
    }

    pub fn coord(&self, u: usize) -> (f64, f64) {
        self.coords[u]
    }

    pub fn depot(&self) -> (f64, f64) {
        self.coords[DEPOT]
    }

    pub fn total_demand(&self) -> u64 {
        self.demand.iter().map(|&d| d as u64).sum()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (xa, ya) = self.coords[a];
        let (xb, yb) = self.coords[b];
        (xa - xb).hypot(ya - yb)
    }

    /// Serializes to the text format read by [`Instance::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "NAME {}", self.name);
        let _ = writeln!(s, "N {}", self.n());
        let _ = writeln!(s, "CAPACITY {}", self.capacity);
        let _ = writeln!(s, "FLEET {}", self.fleet);
        let (dx, dy) = self.depot();
        let _ = writeln!(s, "DEPOT {} {}", fmt_real(dx), fmt_real(dy));
        for u in self.customers() {
            let (x, y) = self.coords[u];
            let _ = writeln!(s, "CUST {} {} {} {}", u, fmt_real(x), fmt_real(y), self.demand[u]);
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses the text format. `origin` is only used in error messages.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };

        let mut name = None;
        let mut n = None;
        let mut capacity = None;
        let mut fleet = None;
        let mut depot = None;
        let mut custs: Vec<Option<(f64, f64, u32)>> = Vec::new();
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let (key, rest) = trimmed.split_once(' ').unwrap_or((trimmed, ""));
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match key {
                "NAME" => name = Some(rest.trim().to_string()),
                "N" => {
                    let v: usize = parse_one(&fields, line, "N").map_err(|m| err(line, m))?;
                    if v == 0 {
                        return Err(err(line, "N must be at least 1".into()));
                    }
                    if v > MAX_CUSTOMERS {
                        return Err(err(line, format!("N exceeds {MAX_CUSTOMERS}")));
                    }
                    custs = vec![None; v];
                    n = Some(v);
                }
                "CAPACITY" => {
                    capacity = Some(parse_one::<u32>(&fields, line, "CAPACITY").map_err(|m| err(line, m))?)
                }
                "FLEET" => fleet = Some(parse_one::<u32>(&fields, line, "FLEET").map_err(|m| err(line, m))?),
                "DEPOT" => {
                    if fields.len() != 2 {
                        return Err(err(line, "DEPOT expects <x> <y>".into()));
                    }
                    let x = parse_real(fields[0]).map_err(|m| err(line, m))?;
                    let y = parse_real(fields[1]).map_err(|m| err(line, m))?;
                    depot = Some((x, y));
                }
                "CUST" => {
                    let n = n.ok_or_else(|| err(line, "CUST before N".into()))?;
                    if fields.len() != 4 {
                        return Err(err(line, "CUST expects <id> <x> <y> <demand>".into()));
                    }
                    let id: usize = fields[0]
                        .parse()
                        .map_err(|_| err(line, format!("bad customer id '{}'", fields[0])))?;
                    if id == 0 || id > n {
                        return Err(err(line, format!("customer id {id} outside 1..={n}")));
                    }
                    let x = parse_real(fields[1]).map_err(|m| err(line, m))?;
                    let y = parse_real(fields[2]).map_err(|m| err(line, m))?;
                    let d: u32 = fields[3]
                        .parse()
                        .map_err(|_| err(line, format!("bad demand '{}'", fields[3])))?;
                    if let Some(cap) = capacity {
                        if d > cap {
                            return Err(err(line, format!("demand {d} exceeds capacity {cap}")));
                        }
                    }
                    if d == 0 {
                        return Err(err(line, "demand must be at least 1".into()));
                    }
                    if custs[id - 1].is_some() {
                        return Err(err(line, format!("duplicate customer id {id}")));
                    }
                    custs[id - 1] = Some((x, y, d));
                }
                other => return Err(err(line, format!("unknown record '{other}'"))),
            }
        }

        let end = last_line.max(1);
        let name = name.ok_or_else(|| err(end, "missing NAME".into()))?;
        n.ok_or_else(|| err(end, "missing N".into()))?;
        let capacity = capacity.ok_or_else(|| err(end, "missing CAPACITY".into()))?;
        let fleet = fleet.ok_or_else(|| err(end, "missing FLEET".into()))?;
        let depot = depot.ok_or_else(|| err(end, "missing DEPOT".into()))?;
        let mut customers = Vec::with_capacity(custs.len());
        for (i, c) in custs.into_iter().enumerate() {
            customers.push(c.ok_or_else(|| err(end, format!("missing customer {}", i + 1)))?);
        }
        Instance::new(name, depot, &customers, capacity, fleet).map_err(|e| err(end, e.to_string()))
    }
}

fn parse_one<T: std::str::FromStr>(fields: &[&str], _line: usize, key: &str) -> std::result::Result<T, String> {
    match fields {
        [v] => v.parse().map_err(|_| format!("{key}: cannot parse '{v}'")),
        _ => Err(format!("{key} expects exactly one value")),
    }
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad number '{s}'"))?;
    if !v.is_finite() {
        return Err(format!("non-finite number '{s}'"));
    }
    Ok(v)
}

/// 17 significant digits; round-trips every f64 exactly.
fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Generates an instance on the `[0, 1000]²` grid.
///
/// The generator is ChaCha8 seeded with `seed` through
/// `SeedableRng::seed_from_u64`. Draws are consumed in the fixed order
/// depot `x, y`, then `x_1, y_1, …, x_n, y_n`, then `d_1, …, d_n`
/// (demands only in [`DemandMode::Uniform1To10`]). Each coordinate is
/// `1000 * U[0,1)` with `U` the 53-bit float from `Rng::random::<f64>()`.
/// The fleet bound defaults to `n`.
pub fn generate_instance(seed: u64, n: usize, capacity: u32, mode: DemandMode) -> Result<Instance> {
    if n < 1 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    if capacity < mode.max_demand() {
        return Err(Error::Validation(format!(
            "capacity {capacity} below the largest possible demand {}",
            mode.max_demand()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| rng.random::<f64>() * GRID_SIZE;
    let depot = (draw(&mut rng), draw(&mut rng));
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        pts.push((x, y));
    }
    let demands: Vec<u32> = match mode {
        DemandMode::Unit => vec![1; n],
        DemandMode::Uniform1To10 => (0..n).map(|_| rng.random_range(1..=10u32)).collect(),
    };
    let customers: Vec<(f64, f64, u32)> = pts
        .into_iter()
        .zip(demands)
        .map(|((x, y), d)| (x, y, d))
        .collect();
    let tag = match mode {
        DemandMode::Unit => "unit",
        DemandMode::Uniform1To10 => "u10",
    };
    Instance::new(
        format!("s{seed}_n{n}_c{capacity}_{tag}"),
        depot,
        &customers,
        capacity,
        n as u32,
    )
}

/// Dense matrix of Euclidean distances over the depot and all customers.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    size: usize,
    c: Vec<f64>,
}

impl CostMatrix {
    pub fn new(inst: &Instance) -> Self {
        let size = inst.n() + 1;
        let mut c = vec![0.0; size * size];
        for a in 0..size {
            for b in (a + 1)..size {
                let d = inst.distance(a, b);
                c[a * size + b] = d;
                c[b * size + a] = d;
            }
        }
        CostMatrix { size, c }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.c[a * self.size + b]
    }

    /// Number of rows: customers plus the depot.
    pub fn size(&self) -> usize {
        self.size
    }
}
