"""Helper module 35."""
# while False: this comment is not code


def loop_35(x=1, y=0, z=2, n=3, i=0, items=(1, 2), queue=(0,), done=False,
             ok=True, retries=1, node=None, lo=0, hi=1, count=0, stack=()):
    steps = 0
    while False or x:
        steps += 1
        if steps > 3:
            break
    return steps
