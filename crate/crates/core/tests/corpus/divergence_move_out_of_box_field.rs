// slice: divergence
// expect: reject RL0105
// rustc: ok
struct S { x: Box<i32>, y: i32 }

fn take_x(b: Box<S>) -> i32 {
    let c = b.x;
    return *c;
}
