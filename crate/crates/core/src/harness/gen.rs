//! Seeded synthetic workload: a social/e-commerce graph with star, path and
//! snowflake shaped queries over it.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::client::BgpQuery;
use crate::rdf::{Term, Triple, TriplePattern};

pub const NS: &str = "http://ex.org/";

/// Shape parameters. `size` is the approximate number of triples.
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub size: usize,
    pub queries: usize,
    /// Average out-degree of `follows` and `likes`.
    pub fanout: usize,
    /// Skew of link targets; 1.0 is uniform, larger values favour low ids.
    pub skew: f64,
    /// Constants in query templates are drawn from the first `constant_pool`
    /// entities of each kind, so that queries repeat triple patterns.
    pub constant_pool: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self { size: 10_000, queries: 60, fanout: 5, skew: 2.0, constant_pool: 4 }
    }
}

#[derive(Clone, Debug)]
pub struct Workload {
    pub triples: Vec<Triple>,
    pub queries: Vec<BgpQuery>,
}

fn iri(local: &str) -> Term {
    Term::iri(&format!("{NS}{local}")).expect("generated IRIs are valid")
}

fn entity(kind: &str, i: usize) -> Term {
    iri(&format!("{kind}{i}"))
}

struct Counts {
    users: usize,
    products: usize,
    reviews: usize,
    companies: usize,
    countries: usize,
    categories: usize,
}

impl Counts {
    fn for_size(size: usize, fanout: usize) -> Self {
        // Per user: type, country, age, `fanout` follows, `fanout` likes.
        // Plus, per user, half a product (4 triples) and one review (3).
        let per_user = 3 + 2 * fanout + 2 + 3;
        let users = (size / per_user).max(4);
        Self {
            users,
            products: (users / 2).max(2),
            reviews: users,
            companies: (users / 10).max(2),
            countries: (users / 25).clamp(2, 40),
            categories: 12,
        }
    }
}

/// A target index in `0..n`, biased towards small indexes when `skew > 1`.
fn skewed(rng: &mut ChaCha8Rng, n: usize, skew: f64) -> usize {
    let u: f64 = rng.gen();
    ((u.powf(skew) * n as f64) as usize).min(n - 1)
}

fn generate_triples(rng: &mut ChaCha8Rng, p: &GenParams, c: &Counts) -> Vec<Triple> {
    let t = |s: Term, pr: &str, o: Term| Triple::new(s, iri(pr), o).expect("well-typed");
    let mut out = Vec::new();
    for k in 0..c.countries {
        out.push(t(entity("country", k), "type", iri("Country")));
    }
    for k in 0..c.companies {
        out.push(t(entity("company", k), "type", iri("Company")));
        out.push(t(entity("company", k), "locatedIn", entity("country", rng.gen_range(0..c.countries))));
    }
    for k in 0..c.products {
        let prod = entity("product", k);
        out.push(t(prod.clone(), "type", iri("Product")));
        out.push(t(prod.clone(), "category", entity("category", rng.gen_range(0..c.categories))));
        out.push(t(prod.clone(), "producer", entity("company", skewed(rng, c.companies, p.skew))));
        out.push(t(prod, "price", Term::literal(&rng.gen_range(1..500).to_string())));
    }
    for k in 0..c.users {
        let user = entity("user", k);
        out.push(t(user.clone(), "type", iri("User")));
        out.push(t(user.clone(), "country", entity("country", rng.gen_range(0..c.countries))));
        out.push(t(user.clone(), "age", Term::literal(&rng.gen_range(18..80).to_string())));
        for (pred, kind, n) in [("follows", "user", c.users), ("likes", "product", c.products)] {
            let degree = rng.gen_range(1..=2 * p.fanout - 1);
            for _ in 0..degree {
                let target = skewed(rng, n, p.skew);
                if kind == "user" && target == k {
                    continue;
                }
                out.push(t(user.clone(), pred, entity(kind, target)));
            }
        }
    }
    for k in 0..c.reviews {
        let review = entity("review", k);
        out.push(t(review.clone(), "reviewOf", entity("product", skewed(rng, c.products, p.skew))));
        out.push(t(review.clone(), "reviewer", entity("user", rng.gen_range(0..c.users))));
        out.push(t(review, "rating", Term::literal(&rng.gen_range(1..=5).to_string())));
    }
    let mut seen = HashSet::with_capacity(out.len());
    out.retain(|t| seen.insert(t.clone()));
    out
}

/// Query templates; `{country}`, `{category}`, `{user}` and `{product}` are
/// replaced with constants.
const TEMPLATES: &[(&str, &[&str])] = &[
    ("star", &["?u <follows> ?v", "?u <country> {country}", "?u <likes> ?p"]),
    ("star", &["?p <category> {category}", "?p <producer> ?c", "?p <price> ?x"]),
    ("star", &["?r <reviewOf> ?p", "?r <rating> ?x", "?r <reviewer> ?u", "?u <country> {country}"]),
    ("path", &["{user} <follows> ?v", "?v <likes> ?p"]),
    ("path", &["?u <likes> ?p", "?p <producer> ?c", "?c <locatedIn> {country}"]),
    ("path", &["{user} <follows> ?v", "?v <follows> ?w", "?w <country> ?k"]),
    ("snowflake", &["?u <country> {country}", "?u <likes> ?p", "?p <category> ?t", "?p <producer> ?c", "?c <locatedIn> ?k"]),
    ("snowflake", &["?r <reviewOf> ?p", "?r <reviewer> ?u", "?p <category> {category}", "?u <follows> ?v"]),
    ("snowflake", &["?u <country> {country}", "?u <age> ?a", "?u <follows> ?v", "?v <likes> ?p", "?p <category> {category}"]),
    ("single", &["?u <likes> {product}"]),
    ("single", &["{user} ?p ?o"]),
];

fn instantiate(rng: &mut ChaCha8Rng, p: &GenParams, c: &Counts, lines: &[&str]) -> Vec<TriplePattern> {
    let pool = |n: usize| p.constant_pool.clamp(1, n);
    let country = format!("<{NS}country{}>", rng.gen_range(0..pool(c.countries)));
    let category = format!("<{NS}category{}>", rng.gen_range(0..pool(c.categories)));
    let user = format!("<{NS}user{}>", rng.gen_range(0..pool(c.users)));
    let product = format!("<{NS}product{}>", rng.gen_range(0..pool(c.products)));
    lines
        .iter()
        .map(|line| {
            let text = line
                .replace("{country}", &country)
                .replace("{category}", &category)
                .replace("{user}", &user)
                .replace("{product}", &product)
                .split(' ')
                .map(|tok| match tok.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
                    Some(local) if !local.contains(':') => format!("<{NS}{local}>"),
                    _ => tok.to_owned(),
                })
                .collect::<Vec<_>>()
                .join(" ");
            TriplePattern::parse_line(&text).expect("templates are valid patterns")
        })
        .collect()
}

/// Generates the dataset and query list for `seed`.
pub fn gen_workload(seed: u64, params: &GenParams) -> Workload {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = Counts::for_size(params.size, params.fanout.max(1));
    let triples = generate_triples(&mut rng, params, &counts);
    // Every template appears at least once when there is room for it.
    let mut picks: Vec<usize> = (0..TEMPLATES.len()).cycle().take(params.queries).collect();
    picks.shuffle(&mut rng);
    let mut per_shape = std::collections::HashMap::new();
    let queries = picks
        .into_iter()
        .map(|i| {
            let (shape, lines) = TEMPLATES[i];
            let n = per_shape.entry(shape).or_insert(0);
            *n += 1;
            let patterns = instantiate(&mut rng, params, &counts, lines);
            BgpQuery::new(format!("{shape}-{n}"), patterns).expect("non-empty template")
        })
        .collect();
    Workload { triples, queries }
}

/// Queries with more than one pattern, i.e. those involving joins.
pub fn join_queries(queries: &[BgpQuery]) -> Vec<BgpQuery> {
    queries.iter().filter(|q| q.patterns.len() > 1).cloned().collect()
}

/// Fraction of queries that have a triple pattern in common with another query.
pub fn shared_pattern_fraction(queries: &[BgpQuery]) -> f64 {
    if queries.is_empty() {
        return 0.0;
    }
    let sharing = queries
        .iter()
        .enumerate()
        .filter(|(i, q)| {
            queries.iter().enumerate().any(|(j, other)| j != *i && q.patterns.iter().any(|tp| other.patterns.contains(tp)))
        })
        .count();
    sharing as f64 / queries.len() as f64
}

pub fn to_ntriples(triples: &[Triple]) -> String {
    let mut out = String::with_capacity(triples.len() * 60);
    for t in triples {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}
