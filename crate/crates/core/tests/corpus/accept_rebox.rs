// slice: accept
// expect: accept
// rustc: ok
// run: 9
fn unwrap(b: Box<Box<i32>>) -> i32 {
    let inner = *b;
    return *inner;
}

fn main() -> i32 {
    let mut b = Box::new(4);
    b = Box::new(*b);
    let bb = Box::new(Box::new(*b + 5));
    return unwrap(bb);
}
