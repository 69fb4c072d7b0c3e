//! The Rand-index likelihood of an observed partition, its exact normalizer,
//! and the adjusted Rand score.

use flatclust::partition::{adjusted_rand_score, bell_number, rand_likelihood, rand_normalizer, Partition};

fn main() -> flatclust::Result<()> {
    let produced = Partition::new(3, vec![vec![0, 1], vec![2]])?;
    for observed in [
        Partition::new(3, vec![vec![0, 1], vec![2]])?,
        Partition::whole(3),
        Partition::singletons(3),
        Partition::new(3, vec![vec![0, 2], vec![1]])?,
    ] {
        println!(
            "gamma({:?} | {:?}) = {}",
            observed.blocks(),
            produced.blocks(),
            rand_likelihood(&observed, &produced)?
        );
    }
    println!("normalizer for {:?}: {}", produced.blocks(), rand_normalizer(&produced)?);
    println!("B_10 = {}, B_50 = {}", bell_number(10)?, bell_number(50)?);

    let p = Partition::new(4, vec![vec![0, 1], vec![2, 3]])?;
    let q = Partition::new(4, vec![vec![0, 2], vec![1, 3]])?;
    println!("ARS of crossing 2+2 partitions: {:.6}", adjusted_rand_score(&p, &q)?);
    println!("ARS of whole vs singletons: {:.6}", adjusted_rand_score(&Partition::whole(4), &Partition::singletons(4))?);
    Ok(())
}
