// slice: reject
// expect: reject RL0101
// rustc: E0382
struct Pair { a: Box<i32>, b: Box<i32> }

fn consume(p: Pair) {
}

fn main() -> i32 {
    let p = Pair { a: Box::new(1), b: Box::new(2) };
    let a = p.a;
    consume(p);
    return *a;
}
