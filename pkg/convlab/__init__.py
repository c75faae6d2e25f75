# convlab: convex-set convergence laboratory
