#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mfsc {

// Even pair interaction phi on R^d with closed-form partial derivatives
// up to max_order(). Multi-indices are per-axis derivative counts.
class PairPotential {
public:
    PairPotential(int dim, int max_order);
    virtual ~PairPotential() = default;

    int dim() const { return dim_; }
    int max_order() const { return max_order_; }

    // Throws UnsupportedOrder when |multi_index| > max_order().
    double derivative(std::span<const int> multi_index, std::span<const double> x) const;
    // Derivative of order m along the single axis of a d=1 potential.
    double derivative_1d(int m, double x) const;
    // Uniform bound on every partial derivative of total order m.
    double bound(int order) const;

    // Gradient, Hessian (row-major d*d) and third-derivative tensor (d^3)
    // at r; null outputs are skipped. Used by the force kernels.
    virtual void pair_terms(const double* r, double* grad, double* hess, double* third) const;

    virtual std::string name() const = 0;
    virtual bool is_zero() const { return false; }

protected:
    virtual double eval(std::span<const int> multi_index, std::span<const double> x) const = 0;
    virtual double eval_bound(int order) const = 0;

private:
    int dim_;
    int max_order_;
};

// A * exp(-|x|^2 / (2 sigma^2)).
class GaussianPotential final : public PairPotential {
public:
    GaussianPotential(int dim, double amplitude = 1.0, double sigma = 1.0, int max_order = 6);
    double amplitude() const { return amplitude_; }
    double sigma() const { return sigma_; }
    void pair_terms(const double* r, double* grad, double* hess, double* third) const override;
    std::string name() const override { return "gaussian"; }

protected:
    double eval(std::span<const int> multi_index, std::span<const double> x) const override;
    double eval_bound(int order) const override;

private:
    double amplitude_;
    double sigma_;
};

class ZeroPotential final : public PairPotential {
public:
    explicit ZeroPotential(int dim, int max_order = 6) : PairPotential(dim, max_order) {}
    void pair_terms(const double* r, double* grad, double* hess, double* third) const override;
    std::string name() const override { return "zero"; }
    bool is_zero() const override { return true; }

protected:
    double eval(std::span<const int>, std::span<const double>) const override { return 0.0; }
    double eval_bound(int) const override { return 0.0; }
};

}  // namespace mfsc
