// slice: reject
// expect: reject RL0102
// rustc: E0382
fn consume(b: Box<i32>) {
}

fn main() -> i32 {
    let b = Box::new(1);
    consume(b);
    let r = &b;
    return 0;
}
