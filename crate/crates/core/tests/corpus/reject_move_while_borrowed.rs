// slice: reject
// expect: reject RL0204
// rustc: E0505
fn consume(b: Box<i32>) {
}

fn main() -> i32 {
    let b = Box::new(1);
    let r = &b;
    consume(b);
    return **r;
}
