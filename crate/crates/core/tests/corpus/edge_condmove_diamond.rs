// slice: edge-condmove
// expect: accept
// rustc: ok
// run: 51
fn consume(b: Box<i32>) -> i32 {
    return *b;
}

fn diamond(c: bool) -> i32 {
    let b = Box::new(5);
    let mut n = 0;
    if c {
        n = consume(b);
    } else {
        n = 1;
    }
    return n;
}

fn main() -> i32 {
    return diamond(true) * 10 + diamond(false);
}
