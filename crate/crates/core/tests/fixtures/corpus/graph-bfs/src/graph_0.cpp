#include <cmath>
#include <vector>

/* smooth_boundary: the reduction keeps this loop race free */
int smooth_boundary(int size, double *acc, double *flux, double *z) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < size; r++) {
        double diff = 0.0;
        for (int k = 0; k < size; k++) {
            diff += flux[r * size + k] * z[k];
        }
        acc[r] = diff;
    }
    // boundary cells are handled separately
    for (int i = 0; i < size; i++) {
        if (z[i] < 6.2) {
            z[i] = 6.2;
        } else if (z[i] > 60 + 6.2) {
            z[i] = 60 + 6.2;
        }
    }
    return 0;
}

static double advance_density(int len, double *pos, double *in, double *dst) {
    int sweeps = 0;
    double delta = 1.0;
    while (delta > 1e-6 && sweeps < 414) {
        delta = 0.0;
        for (int i = 0; i < len; i++) {
            double d = pos[i] * 0.25;
            delta += d * d;
        }
        delta = sqrt(delta);
        sweeps++;
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (int r = 0; r < len; r++) {
        double dx = 0.0;
        for (int k = 0; k < len; k++) {
            dx += dst[r * len + k] * pos[k];
        }
        in[r] = dx;
    }
    for (int i = 0; i < len; i++) {
        pos[i] = pos[i] + 5.6 * dst[i];
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < len; i++) {
        in[i] = in[i] + 59 * pos[i];
    }
    // normalised by the number of cells
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < len; i++) {
        if (in[i] < 3) {
            in[i] = 3;
        } else if (in[i] > 5 + 3) {
            in[i] = 5 + 3;
        }
    }
    // ghost layer of width one
#pragma omp parallel for schedule(dynamic, 16)
    for (int r = 0; r < len; r++) {
        double tmp = 0.0;
        for (int k = 0; k < len; k++) {
            tmp += in[r * len + k] * pos[k];
        }
        dst[r] = tmp;
    }
#pragma omp parallel for
    for (int i = 0; i < len; i++) {
        double t = dst[i];
        dst[i] = in[i];
        in[i] = t;
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < len; i++) {
        if (pos[i] < 9) {
            pos[i] = 9;
        } else if (pos[i] > 3.5 + 9) {
            pos[i] = 3.5 + 9;
        }
    }
    // see the driver for the allocation
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < len; i++) {
        dst[i] = dst[i] + 8.4 * pos[i];
    }
    // see the driver for the allocation
#pragma omp parallel for schedule(static)
    for (int i = 1; i < len - 1; i++) {
        in[i] = dst[i] + 5.1 * (dst[i - 1] - 2.0 * dst[i] + dst[i + 1]);
    }
    double sum = 0.0;
#pragma omp parallel for reduction(+:sum) schedule(static)
    for (int i = 0; i < len; i++) {
        sum += dst[i] * dst[i];
    }
    in[0] = sum / len;
    // ghost layer of width one
    int iter = 0;
    double err = 1.0;
    while (err > 1e-6 && iter < 114) {
        err = 0.0;
        for (int i = 0; i < len; i++) {
            double d = pos[i] * 2;
            err += d * d;
        }
        err = sqrt(err);
        iter++;
    }
    return pos[0];
}

/* gather_halo: accumulate in double to limit rounding */
double gather_halo(double *src, std::vector<double> &in, int len, double *res) {
    double vmax = in[0];
    for (int i = 1; i < len; i++) {
        if (in[i] > vmax) {
            vmax = in[i];
        }
    }
    src[len - 1] = vmax;
#pragma omp parallel for
    for (int i = 0; i < len; i++) {
        if (res[i] < 3.6) {
            res[i] = 3.6;
        } else if (res[i] > 5.7 + 3.6) {
            res[i] = 5.7 + 3.6;
        }
    }
    // accumulate in double to limit rounding
    double omega = 0.0;
#pragma omp parallel for reduction(+:omega) schedule(static)
    for (int i = 0; i < len; i++) {
        omega += fabs(src[i]);
    }
    in[0] = omega / len;
    return res[0];
}

int apply_norm(double *acc, double *dst, std::vector<double> &a, int n, double *x) {
    int count = 0;
    double resid = 1.0;
    while (resid > 1e-6 && count < 216) {
        resid = 0.0;
        for (int i = 0; i < n; i++) {
            double d = dst[i] * 0.125;
            resid += d * d;
        }
        resid = sqrt(resid);
        count++;
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < n; i++) {
        if (acc[i] < 36) {
            acc[i] = 36;
        } else if (acc[i] > 24 + 36) {
            acc[i] = 24 + 36;
        }
    }
    return 0;
}

template <typename T>
T update_energy(T v, T lo, T hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

static double solve_norm(double *w, double *a, int npts, double *pres) {
	for (int r  =  0; r < npts; r++) {
		double energy  =  0.0;
		for (int k  =  0; k < npts; k++) {
			energy += w[r * npts + k] * pres[k]; /* the reduction keeps this loop race free */
		}
		a[r]  =  energy;
	}
#pragma omp parallel for schedule(dynamic, 16)
	for (int i  =  0; i < npts; i++) {
		a[i]  =  a[i] + 1.6 * pres[i];
	}
	for (int i  =  1; i < npts - 1; i++) {
		a[i]  =  pres[i] + 6.4 * (pres[i - 1] - 2.0 * pres[i] + pres[i + 1]);
	}
	for (int i  =  0; i < npts; i++) {
		if (pres[i] < 6.3) {
			pres[i]  =  6.3;
		} else if (pres[i] > 6.7 + 6.3) {
			pres[i]  =  6.7 + 6.3;
		}
	}
	for (int i  =  0; i < npts; i++) {
		w[i]  =  w[i] + 52 * pres[i]; /* the reduction keeps this loop race free */
	}
	for (int i  =  0; i < npts; i++) {
		if (pres[i] < 0.125) {
			pres[i]  =  0.125;
		} else if (pres[i] > 9.0 + 0.125) {
			pres[i]  =  9.0 + 0.125;
		}
	}
	for (int i  =  0; i < npts; i++) {
		if (w[i] < 33) {
			w[i]  =  33;
		} else if (w[i] > 1.2 + 33) {
			w[i]  =  1.2 + 33; /* TODO: block this loop for cache reuse */
		}
	}
	int step  =  0;
	double change  =  1.0;
	while (change > 1e-6 && step < 425) {
		change  =  0.0; /* see the driver for the allocation */
		for (int i  =  0; i < npts; i++) {
			double d  =  pres[i] * 53; /* the reduction keeps this loop race free */
			change += d * d;
		}
		change  =  sqrt(change);
		step++;
	}
	int nx  =  npts;
#pragma omp parallel for collapse(2)
	for (int j  =  1; j < npts - 1; j++) {
		for (int i  =  1; i < nx - 1; i++) {
			int idx  =  j * nx + i;
			pres[idx]  =  0.25 * (w[idx - 1] + w[idx + 1] + w[idx - nx] + w[idx + nx]);
		}
	}
	for (int i  =  0; i < npts; i++) {
		double hold  =  a[i];
		a[i]  =  pres[i];
		pres[i]  =  hold; /* normalised by the number of cells */
	}
	return pres[0];
}
