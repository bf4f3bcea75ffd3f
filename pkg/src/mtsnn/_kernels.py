"""Compiled inner loops. They release the GIL so pool workers run concurrently.

The arithmetic mirrors :mod:`mtsnn.neuron` operation for operation; no
fastmath, so results do not depend on how a group is chunked.
"""

import numba as nb


@nb.njit(nogil=True, cache=True)
def update_chunks(
    los, his, step_id, v, u, a, b, c, d, i_cuba, g_exc, g_inh,
    coba, e_exc, e_inh, dec_exc, dec_inh, dt, rk4, threshold, fired, gen,
):
    h = 0.5 * dt
    sixth = dt / 6.0
    for k in range(los.shape[0]):
        for j in range(los[k], his[k]):
            vj = v[j]
            uj = u[j]
            if coba:
                i = g_exc[j] * (e_exc - vj) + g_inh[j] * (e_inh - vj)
            else:
                i = i_cuba[j]
            aj = a[j]
            bj = b[j]
            if rk4:
                k1v = 0.04 * vj * vj + 5.0 * vj + 140.0 - uj + i
                k1u = aj * (bj * vj - uj)
                v2 = vj + h * k1v
                u2 = uj + h * k1u
                k2v = 0.04 * v2 * v2 + 5.0 * v2 + 140.0 - u2 + i
                k2u = aj * (bj * v2 - u2)
                v3 = vj + h * k2v
                u3 = uj + h * k2u
                k3v = 0.04 * v3 * v3 + 5.0 * v3 + 140.0 - u3 + i
                k3u = aj * (bj * v3 - u3)
                v4 = vj + dt * k3v
                u4 = uj + dt * k3u
                k4v = 0.04 * v4 * v4 + 5.0 * v4 + 140.0 - u4 + i
                k4u = aj * (bj * v4 - u4)
                vj = vj + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
                uj = uj + sixth * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            else:
                dv = 0.04 * vj * vj + 5.0 * vj + 140.0 - uj + i
                du = aj * (bj * vj - uj)
                vj = vj + dt * dv
                uj = uj + dt * du
            if coba:
                g_exc[j] *= dec_exc
                g_inh[j] *= dec_inh
            if vj >= threshold:
                vj = c[j]
                uj = uj + d[j]
                fired[j] += 1
            v[j] = vj
            u[j] = uj
            gen[j] = step_id


@nb.njit(nogil=True, cache=True)
def deliver(ids, t, out_ptr, out_post, out_weight, out_delay, out_inh, ring_exc, ring_inh):
    """Push the fan-out of each id in ``ids`` (ascending) into the ring."""
    size = ring_exc.shape[0]
    for n in range(ids.shape[0]):
        pre = ids[n]
        for k in range(out_ptr[pre], out_ptr[pre + 1]):
            s = (t + out_delay[k]) % size
            if out_inh[k]:
                ring_inh[s, out_post[k]] += out_weight[k]
            else:
                ring_exc[s, out_post[k]] += out_weight[k]
