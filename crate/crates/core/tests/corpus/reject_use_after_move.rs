// slice: reject
// expect: reject RL0101
// rustc: E0382
fn main() -> i32 {
    let b = Box::new(1);
    let c = b;
    return *b;
}
