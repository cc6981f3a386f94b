// slice: edge-condmove
// expect: accept
// rustc: ok
// run: 11
fn consume(b: Box<i32>) -> i32 {
    return *b;
}

fn main() -> i32 {
    let mut b = Box::new(1);
    let c = *b > 0;
    let mut n = 0;
    if c {
        n = consume(b);
        b = Box::new(10);
    }
    return n + *b;
}
