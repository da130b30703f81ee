"""
GAS Vine - 基于 GAS 动态的时变 R-Vine Copula 风险度量工具

对多元时间序列拟合 ARFIMA-GARCH 边缘模型与时变 R-Vine/C-Vine/D-Vine Copula，
并通过蒙特卡洛模拟给出 VaR 预测与 Kupiec 回测。
"""

__version__ = "0.1.0"
