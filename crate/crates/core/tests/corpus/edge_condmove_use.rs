// slice: edge-condmove
// expect: reject RL0101
// rustc: E0382
fn consume(b: Box<i32>) -> i32 {
    return *b;
}

fn main() -> i32 {
    let b = Box::new(1);
    let c = *b > 0;
    let mut n = 0;
    if c {
        n = consume(b);
    }
    return n + *b;
}
