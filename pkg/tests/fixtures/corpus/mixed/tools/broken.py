def f(:
    while False:
        pass
