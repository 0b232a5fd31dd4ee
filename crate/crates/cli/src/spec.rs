//! Instance sources: SFI files and `gen:` specs.
//!
//! Specs: `gen:ladder:N:eps`, `gen:girth:<name>` (k4, k33, petersen,
//! heawood, mcgee, tutte-coxeter), `gen:rand:pairs:K:seed`, `gen:hub:N`.

use std::path::Path;

use steiner_greedy::instance::{
    self, builtin_cubic, gen_girth_lb, gen_hub_chain, gen_ladder, gen_random, GirthInstanceSpec,
    Instance,
};
use steiner_greedy::rational::Rational;

pub fn load_instance(name: &str) -> anyhow::Result<Instance> {
    if let Some(rest) = name.strip_prefix("gen:") {
        return generate(rest);
    }
    let inst = instance::load(Path::new(name))?;
    Ok(inst)
}

fn generate(spec: &str) -> anyhow::Result<Instance> {
    let parts: Vec<&str> = spec.split(':').collect();
    let inst = match parts.as_slice() {
        ["ladder", n, eps] => {
            let n: usize = n.parse()?;
            let eps: Rational = eps.parse()?;
            gen_ladder(n, eps)?
        }
        ["girth", name] => {
            let base = builtin_cubic(name)
                .ok_or_else(|| anyhow::anyhow!("unknown built-in cubic graph `{name}`"))?;
            gen_girth_lb(&GirthInstanceSpec::from_builtin(base)?)?
        }
        ["rand", "pairs", k, seed] => {
            let k: usize = k.parse()?;
            let seed: u64 = seed.parse()?;
            let n = (2 * k + 2).min(14).max(2 * k);
            gen_random(k, n, seed)
        }
        ["hub", n] => gen_hub_chain(n.parse()?)?,
        _ => anyhow::bail!("unknown generator spec `gen:{spec}`"),
    };
    inst.validate()?;
    Ok(inst)
}
