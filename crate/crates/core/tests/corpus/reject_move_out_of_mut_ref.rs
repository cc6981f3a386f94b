// slice: reject
// expect: reject RL0103
// rustc: E0507
struct Holder { b: Box<i32> }

fn take(h: &mut Holder) -> Box<i32> {
    return h.b;
}
