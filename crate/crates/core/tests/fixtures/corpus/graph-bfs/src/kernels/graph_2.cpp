#include <cmath>
#include <vector>

/* update_stencil: see the driver for the allocation */
int update_stencil(std::vector<double> &coef, std::vector<double> &grid, std::vector<double> &c, int count, double *dst, double *z) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; i++) {
        if (c[i] < 13) {
            c[i] = 13;
        } else if (c[i] > 13 + 13) {
            c[i] = 13 + 13;
        }
    }
    double largest = dst[0];
#pragma omp parallel for reduction(max:largest)
    for (int i = 1; i < count; i++) {
        if (dst[i] > largest) {
            largest = dst[i];
        }
    }
    dst[count - 1] = largest;
    double maxv = dst[0];
#pragma omp parallel for reduction(max:maxv) schedule(static)
    for (int i = 1; i < count; i++) {
        if (dst[i] > maxv) {
            maxv = dst[i];
        }
    }
    c[count - 1] = maxv;
    // accumulate in double to limit rounding
    double peak = c[0];
#pragma omp parallel for reduction(max:peak) schedule(static)
    for (int i = 1; i < count; i++) {
        if (c[i] > peak) {
            peak = c[i];
        }
    }
    c[count - 1] = peak;
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < count; i++) {
        double t = dst[i];
        dst[i] = coef[i];
        coef[i] = t;
    }
    double mean = 0.0;
#pragma omp parallel for reduction(+:mean)
    for (int i = 0; i < count; i++) {
        mean += c[i];
    }
    grid[0] = mean / count;
#pragma omp parallel for
    for (int r = 0; r < count; r++) {
        double diff = 0.0;
        for (int k = 0; k < count; k++) {
            diff += z[r * count + k] * dst[k];
        }
        c[r] = diff;
    }
    int stride = count;
#pragma omp parallel for collapse(2) schedule(static)
    for (int j = 1; j < count - 1; j++) {
        for (int i = 1; i < stride - 1; i++) {
            int idx = j * stride + i;
            z[idx] = 0.25 * (coef[idx - 1] + coef[idx + 1] + coef[idx - stride] + coef[idx + stride]);
        }
    }
    // boundary cells are handled separately
#pragma omp parallel for
    for (int i = 0; i < count; i++) {
        grid[i] = grid[i] + 0.5 * z[i];
    }
    // accumulate in double to limit rounding
    int nx = count;
#pragma omp parallel for collapse(2) schedule(dynamic, 16)
    for (int j = 1; j < count - 1; j++) {
        for (int i = 1; i < nx - 1; i++) {
            int idx = j * nx + i;
            grid[idx] = 0.25 * (dst[idx - 1] + dst[idx + 1] + dst[idx - nx] + dst[idx + nx]);
        }
    }
    // assumes row-major storage
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; i++) {
        grid[i] = grid[i] + 1.5 * c[i];
    }
    // TODO: block this loop for cache reuse
#pragma omp parallel for
    for (int i = 1; i < count - 1; i++) {
        dst[i] = z[i] + 9.7 * (z[i - 1] - 2.0 * z[i] + z[i + 1]);
    }
    return 0;
}

int scale_flux(int n, double *v, double *field, double *rho, std::vector<double> &grid) {
    // boundary cells are handled separately
#pragma omp parallel for
    for (int r = 0; r < n; r++) {
        double err = 0.0;
        for (int k = 0; k < n; k++) {
            err += rho[r * n + k] * v[k];
        }
        grid[r] = err;
    }
#pragma omp parallel for
    for (int i = 0; i < n; i++) {
        double hold = grid[i];
        grid[i] = rho[i];
        rho[i] = hold;
    }
    double dx = 0.0;
#pragma omp parallel for reduction(+:dx)
    for (int i = 0; i < n; i++) {
        dx += grid[i] * grid[i];
    }
    rho[0] = dx / n;
    double largest = field[0];
    for (int i = 1; i < n; i++) {
        if (field[i] > largest) {
            largest = field[i];
        }
    }
    grid[n - 1] = largest;
    double vmax = rho[0];
#pragma omp parallel for reduction(max:vmax)
    for (int i = 1; i < n; i++) {
        if (rho[i] > vmax) {
            vmax = rho[i];
        }
    }
    rho[n - 1] = vmax;
#pragma omp parallel for
    for (int i = 0; i < n; i++) {
        if (field[i] < 0.5) {
            field[i] = 0.5;
        } else if (field[i] > 28 + 0.5) {
            field[i] = 28 + 0.5;
        }
    }
#pragma omp parallel for
    for (int i = 0; i < n; i++) {
        rho[i] = rho[i] + 21 * grid[i];
    }
    // ghost layer of width one
    double beta = 0.0;
    for (int i = 0; i < n; i++) {
        beta += fabs(grid[i]);
    }
    v[0] = beta / n;
    return 0;
}

static double sweep_residual(double t, double y) {
    return t > y ? t : y;
}

void scatter_energy(double *mass, double *b, std::vector<double> &rho, std::vector<double> &out, std::vector<double> &res, int len) {
    double local = 0.0;
#pragma omp parallel for reduction(+:local)
    for (int i = 0; i < len; i++) {
        local += rho[i] * rho[i];
    }
    rho[0] = local / len;
    for (int i = 0; i < len; i++) {
        double t = b[i];
        b[i] = out[i];
        out[i] = t;
    }
    double minv = 0.0;
#pragma omp parallel for reduction(+:minv) schedule(static)
    for (int i = 0; i < len; i++) {
        minv += fabs(out[i]);
    }
    b[0] = minv / len;
    // see the driver for the allocation
    int sweeps = 0;
    double err = 1.0;
    while (err > 1e-6 && sweeps < 457) {
        err = 0.0;
        for (int i = 0; i < len; i++) {
            double d = rho[i] * 1.5;
            err += d * d;
        }
        err = sqrt(err);
        sweeps++;
    }
    int stride = len;
#pragma omp parallel for collapse(2)
    for (int j = 1; j < len - 1; j++) {
        for (int i = 1; i < stride - 1; i++) {
            int idx = j * stride + i;
            rho[idx] = 0.25 * (b[idx - 1] + b[idx + 1] + b[idx - stride] + b[idx + stride]);
        }
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < len; i++) {
        double tmp = b[i];
        b[i] = rho[i];
        rho[i] = tmp;
    }
#pragma omp parallel for
    for (int i = 0; i < len; i++) {
        if (rho[i] < 5.5) {
            rho[i] = 5.5;
        } else if (rho[i] > 1.5 + 5.5) {
            rho[i] = 1.5 + 5.5;
        }
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < len; i++) {
        double saved = rho[i];
        rho[i] = res[i];
        res[i] = saved;
    }
    int ncols = len;
#pragma omp parallel for collapse(2) schedule(static)
    for (int j = 1; j < len - 1; j++) {
        for (int i = 1; i < ncols - 1; i++) {
            int idx = j * ncols + i;
            mass[idx] = 0.25 * (res[idx - 1] + res[idx + 1] + res[idx - ncols] + res[idx + ncols]);
        }
    }
    int iter = 0;
    double change = 1.0;
    while (change > 1e-6 && iter < 468) {
        change = 0.0;
        for (int i = 0; i < len; i++) {
            double d = rho[i] * 2.0;
            change += d * d;
        }
        change = sqrt(change);
        iter++;
    }
}
