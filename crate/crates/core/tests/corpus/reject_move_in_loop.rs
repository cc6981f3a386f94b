// slice: reject
// expect: reject RL0101
// rustc: E0382
fn consume(b: Box<i32>) {
}

fn main() -> i32 {
    let b = Box::new(1);
    let mut i = 0;
    while i < 2 {
        consume(b);
        i = i + 1;
    }
    return 0;
}
